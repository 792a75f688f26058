use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;
use crate::sample::{pool, Sample};

/// Label-permutation calibration settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PermutationScheme {
    pub b_perm: usize,
    pub seed: u64,
}

impl Default for PermutationScheme {
    fn default() -> Self {
        PermutationScheme {
            b_perm: 1000,
            seed: 0,
        }
    }
}

/// Which values of the statistic count as evidence against the null.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tail {
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationOutcome {
    pub observed: f64,
    pub p_value: f64,
    /// Permuted statistics in permutation order.
    pub permuted: Vec<f64>,
}

impl PermutationOutcome {
    /// Empirical `(1 − α)` quantile of the permuted statistics in the
    /// direction of `tail`.
    pub fn critical_value(&self, alpha: f64, tail: Tail) -> f64 {
        let mut v = self.permuted.clone();
        v.sort_by(f64::total_cmp);
        if v.is_empty() {
            return self.observed;
        }
        let k = ((1.0 - alpha) * v.len() as f64).ceil() as usize;
        match tail {
            Tail::Upper => v[k.clamp(1, v.len()) - 1],
            Tail::Lower => v[v.len() - k.clamp(1, v.len())],
        }
    }
}

fn is_extreme(value: f64, observed: f64, tail: Tail) -> bool {
    // equal partitions may sum in a different order
    let tol = 1e-9 * (1.0 + observed.abs());
    match tail {
        Tail::Upper => value >= observed - tol,
        Tail::Lower => value <= observed + tol,
    }
}

/// Permutation test on pooled indices: the statistic receives the pooled
/// row indices assigned to each sample. The observed assignment is
/// `0..n` versus `n..n+m`; permutation `b` uses its own derived stream.
pub fn permutation_test<F>(
    n: usize,
    m: usize,
    scheme: &PermutationScheme,
    tail: Tail,
    statistic: F,
) -> Result<PermutationOutcome>
where
    F: Fn(&[usize], &[usize]) -> f64 + Sync,
{
    if scheme.b_perm == 0 {
        return invalid("at least one permutation is required");
    }
    if n == 0 || m == 0 {
        return invalid("both samples must be non-empty");
    }
    let idx: Vec<usize> = (0..n + m).collect();
    let observed = statistic(&idx[..n], &idx[n..]);
    let permuted: Vec<f64> = (0..scheme.b_perm)
        .into_par_iter()
        .map(|b| {
            let mut p = idx.clone();
            let mut r = rng::derived_stream(scheme.seed, &[rng::tag("perm"), b as u64]);
            p.shuffle(&mut r);
            statistic(&p[..n], &p[n..])
        })
        .collect();
    let hits = permuted
        .iter()
        .filter(|&&v| is_extreme(v, observed, tail))
        .count();
    Ok(PermutationOutcome {
        observed,
        p_value: (1 + hits) as f64 / (1 + scheme.b_perm) as f64,
        permuted,
    })
}

/// Permutation p-value `(1 + #{permuted at least as extreme}) / (1 + B)`
/// of an arbitrary two-sample statistic.
pub fn permutation_pvalue<F>(
    statistic: F,
    x: &Sample,
    y: &Sample,
    scheme: &PermutationScheme,
    tail: Tail,
) -> Result<f64>
where
    F: Fn(&Sample, &Sample) -> Result<f64> + Sync,
{
    let pooled = pool(x, y)?;
    // surface errors of the statistic on the observed split first
    statistic(x, y)?;
    let out = permutation_test(x.len(), y.len(), scheme, tail, |a, b| {
        statistic(&pooled.select(a), &pooled.select(b)).unwrap_or(f64::NAN)
    })?;
    Ok(out.p_value)
}
