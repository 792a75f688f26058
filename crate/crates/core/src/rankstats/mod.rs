//! Two-sample linear rank statistics and their pivotal null laws.

mod generator;
mod table;

pub use generator::ScoreGenerator;
pub use table::{
    null_distribution, null_quantile, p_value, stat_tolerance, NullTable, NullTableCache,
    QuantileMethod, TableMethod, DEFAULT_EXACT_BUDGET, DEFAULT_MC_DRAWS,
};

use crate::error::{invalid, Error, Result};
use crate::numeric::integrate_unit_split;
use crate::roc::RocFn;

/// Pooled midranks: tied values share the mean of the positions they occupy.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub ranks: Vec<f64>,
    pub pooled_size: usize,
}

pub fn midranks(pooled: &[f64]) -> Result<RankVector> {
    if pooled.is_empty() {
        return invalid("cannot rank an empty sample");
    }
    if pooled.iter().any(|v| !v.is_finite()) {
        return invalid("non-finite score");
    }
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let mid = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mid;
        }
        start = end;
    }
    Ok(RankVector {
        ranks,
        pooled_size: pooled.len(),
    })
}

fn pooled_ranks(x: &[f64], y: &[f64]) -> Result<RankVector> {
    if x.is_empty() || y.is_empty() {
        return invalid("both samples must be non-empty");
    }
    let mut pooled = Vec::with_capacity(x.len() + y.len());
    pooled.extend_from_slice(x);
    pooled.extend_from_slice(y);
    midranks(&pooled)
}

/// A raw linear rank statistic and its centered form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankStatistic {
    /// `Σᵢ φ(Rank(xᵢ)/(N+1))`.
    pub raw: f64,
    /// `raw / n − ∫φ`.
    pub centered: f64,
}

pub fn linear_rank_statistic(
    x_scores: &[f64],
    y_scores: &[f64],
    generator: &ScoreGenerator,
) -> Result<RankStatistic> {
    let ranks = pooled_ranks(x_scores, y_scores)?;
    let denom = (ranks.pooled_size + 1) as f64;
    let n = x_scores.len();
    let raw: f64 = ranks.ranks[..n]
        .iter()
        .map(|r| generator.eval(r / denom))
        .sum();
    Ok(RankStatistic {
        raw,
        centered: raw / n as f64 - generator.integral(),
    })
}

/// Rank-sum statistic `Σᵢ Rank(xᵢ)` with midranks.
pub fn mww_statistic(x_scores: &[f64], y_scores: &[f64]) -> Result<f64> {
    let ranks = pooled_ranks(x_scores, y_scores)?;
    Ok(ranks.ranks[..x_scores.len()].iter().sum())
}

/// Large-sample mean of `Ŵ^φ_{n,m}/n` when the positive fraction is `p` and
/// the univariate ROC curve is `roc`.
pub fn asymptotic_mean<R: RocFn + ?Sized>(
    roc: &R,
    p: f64,
    generator: &ScoreGenerator,
) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("positive fraction must lie in (0,1), got {p}"));
    }
    let arg = |a: f64| p * (1.0 - roc.eval(a)) + (1.0 - p) * (1.0 - a);
    let integrand = |a: f64| generator.eval(arg(a));
    let mut splits = roc.breakpoints();
    if let Some(u0) = generator.kink() {
        // arg is nonincreasing in a; locate the crossing of u0
        if arg(0.0) >= u0 && arg(1.0) < u0 {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if arg(mid) >= u0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            splits.push(0.5 * (lo + hi));
        }
    }
    let integral = integrate_unit_split(&integrand, &splits, 1e-10);
    Ok(generator.integral() / p - (1.0 - p) / p * integral)
}

/// Distribution-free upper bound on the null quantile `q^φ_{n,m}(α)` for
/// `n = ⌊pN⌋`, valid for smooth generators.
pub fn quantile_upper_bound(
    pooled: usize,
    p: f64,
    generator: &ScoreGenerator,
    alpha: f64,
) -> Result<f64> {
    let Some(deriv) = generator.deriv_sup_norm() else {
        return Err(Error::UnsupportedGenerator(format!(
            "{generator} is not differentiable"
        )));
    };
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("positive fraction must lie in (0,1), got {p}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if (pooled as f64) < 1.0 / p {
        return invalid(format!("pooled size {pooled} below 1/p"));
    }
    let sup = generator.sup_norm();
    let c = (p / (sup * sup))
        .min(1.0 / (p * deriv * deriv))
        .min(1.0 / ((1.0 - p) * deriv * deriv))
        / 8.0;
    Ok(((18.0 / alpha).ln() / (c * pooled as f64)).sqrt())
}
