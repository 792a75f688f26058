//! Comparison two-sample tests: kernel MMD, energy distance, the
//! Friedman–Rafsky minimum-spanning-tree runs test, all calibrated by label
//! permutation, and a rank test on Tukey depth values.

mod depth;
mod permutation;
mod statistics;

pub use depth::{directions, tukey_depth, DepthConfig, DepthReference};
pub use permutation::{
    permutation_pvalue, permutation_test, PermutationOutcome, PermutationScheme, Tail,
};
pub use statistics::{
    cross_edges, energy_statistic, fr_statistic, median_heuristic, minimum_spanning_tree,
    mmd_unbiased, PairMatrix,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::euclidean;
use crate::rankstats::{
    linear_rank_statistic, stat_tolerance, NullTableCache, QuantileMethod, ScoreGenerator,
};
use crate::rng;
use crate::sample::{pool, Sample};
use crate::twostage::{check_alpha, Sizes, TestReport};
use statistics::{energy_from_matrix, gaussian_kernel, mmd_from_matrix};

/// Bandwidth choice for the MMD test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum MmdBandwidth {
    /// Median pairwise distance of the pooled sample.
    Median,
    Fixed(f64),
    /// Chosen on a held-out half of each sample by the standardized
    /// permutation score; the test then runs on the other halves.
    Grid(Vec<f64>),
}

impl Default for MmdBandwidth {
    fn default() -> Self {
        MmdBandwidth::Median
    }
}

/// `{10⁻³, 10⁻², …, 10³}`.
pub fn bandwidth_grid() -> Vec<f64> {
    (-3..=3).map(|k| 10f64.powi(k)).collect()
}

fn baseline_report(
    test: &str,
    observed: f64,
    critical: f64,
    p_value: f64,
    alpha: f64,
    sizes: Sizes,
    phi: String,
    method: String,
    seed: u64,
) -> TestReport {
    TestReport {
        test: test.into(),
        statistic_centered: observed,
        quantile: critical,
        p_value,
        reject: p_value <= alpha,
        alpha,
        sizes,
        phi,
        ranker: method,
        seed,
        degenerate: false,
        holdout_auc: None,
    }
}

fn full_sizes(x: &Sample, y: &Sample) -> Sizes {
    Sizes {
        n_train: 0,
        m_train: 0,
        n_test: x.len(),
        m_test: y.len(),
    }
}

fn select_bandwidth(
    x: &Sample,
    y: &Sample,
    grid: &[f64],
    scheme: &PermutationScheme,
) -> Result<f64> {
    let pooled = pool(x, y)?;
    let d = PairMatrix::build(&pooled, euclidean);
    let sel = PermutationScheme {
        b_perm: scheme.b_perm.clamp(1, 200),
        seed: rng::derive_seed(scheme.seed, &[rng::tag("bandwidth")]),
    };
    let mut best = (f64::NEG_INFINITY, grid[0]);
    for &bw in grid {
        let c = 1.0 / (2.0 * bw * bw);
        let k = d.map(|v| (-v * v * c).exp());
        let out = permutation_test(x.len(), y.len(), &sel, Tail::Upper, |a, b| {
            mmd_from_matrix(&k, a, b)
        })?;
        let n = out.permuted.len() as f64;
        let mean = out.permuted.iter().sum::<f64>() / n;
        let var = out.permuted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let z = if var > 0.0 {
            (out.observed - mean) / var.sqrt()
        } else {
            f64::NEG_INFINITY
        };
        if z > best.0 {
            best = (z, bw);
        }
    }
    Ok(best.1)
}

/// Permutation-calibrated unbiased MMD test (upper tail).
pub fn mmd_test(
    x: &Sample,
    y: &Sample,
    bandwidth: &MmdBandwidth,
    alpha: f64,
    scheme: &PermutationScheme,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    if x.len() < 2 || y.len() < 2 {
        return invalid("MMD needs at least two points per sample");
    }
    let (x, y, bw) = match bandwidth {
        MmdBandwidth::Median => (x.clone(), y.clone(), median_heuristic(x, y)?),
        MmdBandwidth::Fixed(b) => (x.clone(), y.clone(), *b),
        MmdBandwidth::Grid(grid) => {
            if grid.is_empty() {
                return invalid("bandwidth grid is empty");
            }
            let half = |s: &Sample, label: &str| -> Result<(Sample, Sample)> {
                let cfg = crate::twostage::SplitConfig {
                    train_fraction: 0.5,
                    seed: rng::derive_seed(scheme.seed, &[rng::tag(label)]),
                };
                let sp = crate::twostage::split_samples(s, s, &cfg)?;
                Ok((sp.x_train, sp.x_test))
            };
            let (xs, xt) = half(x, "mmd-x")?;
            let (ys, yt) = half(y, "mmd-y")?;
            if xt.len() < 2 || yt.len() < 2 {
                return invalid("samples too small for bandwidth selection");
            }
            let bw = select_bandwidth(&xs, &ys, grid, scheme)?;
            (xt, yt, bw)
        }
    };
    if !(bw > 0.0) {
        return invalid("bandwidth must be positive (all pooled points coincide?)");
    }
    let pooled = pool(&x, &y)?;
    let k = PairMatrix::build(&pooled, gaussian_kernel(bw));
    let out = permutation_test(x.len(), y.len(), scheme, Tail::Upper, |a, b| {
        mmd_from_matrix(&k, a, b)
    })?;
    Ok(baseline_report(
        "mmd",
        out.observed,
        out.critical_value(alpha, Tail::Upper),
        out.p_value,
        alpha,
        full_sizes(&x, &y),
        format!("gaussian:{bw}"),
        format!("permutation:{}", scheme.b_perm),
        scheme.seed,
    ))
}

/// Permutation-calibrated energy test (upper tail).
pub fn energy_test(
    x: &Sample,
    y: &Sample,
    alpha: f64,
    scheme: &PermutationScheme,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let pooled = pool(x, y)?;
    let d = PairMatrix::build(&pooled, euclidean);
    let out = permutation_test(x.len(), y.len(), scheme, Tail::Upper, |a, b| {
        energy_from_matrix(&d, a, b)
    })?;
    Ok(baseline_report(
        "energy",
        out.observed,
        out.critical_value(alpha, Tail::Upper),
        out.p_value,
        alpha,
        full_sizes(x, y),
        "euclidean".into(),
        format!("permutation:{}", scheme.b_perm),
        scheme.seed,
    ))
}

/// Friedman–Rafsky test: few cross edges in the pooled minimum spanning
/// tree are evidence against the null (lower tail). The tree is computed
/// once; permutations only relabel its vertices.
pub fn fr_test(
    x: &Sample,
    y: &Sample,
    alpha: f64,
    scheme: &PermutationScheme,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let pooled = pool(x, y)?;
    let tree = minimum_spanning_tree(&PairMatrix::build(&pooled, euclidean));
    let total = pooled.len();
    let out = permutation_test(x.len(), y.len(), scheme, Tail::Lower, |a, _| {
        let mut is_x = vec![false; total];
        a.iter().for_each(|&i| is_x[i] = true);
        cross_edges(&tree, &is_x) as f64
    })?;
    Ok(baseline_report(
        "fr",
        out.observed,
        out.critical_value(alpha, Tail::Lower),
        out.p_value,
        alpha,
        full_sizes(x, y),
        "mst".into(),
        format!("permutation:{}", scheme.b_perm),
        scheme.seed,
    ))
}

/// Rank test on depth values. A reference part of the larger sample
/// defines the depth; the remaining points of that sample and the whole
/// other sample are ranked by depth and compared with a two-sided region,
/// `α/2` in each tail of the centered statistic.
pub fn tukey_depth_test(
    x: &Sample,
    y: &Sample,
    generator: ScoreGenerator,
    alpha: f64,
    cfg: &DepthConfig,
    quantile: QuantileMethod,
    cache: &NullTableCache,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    cfg.validate()?;
    if x.dim() != y.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
    }
    let (x_eval, y_eval, reference) = if x.len() >= y.len() {
        let (r, rest) = depth::reference_split(x, cfg.reference_fraction, cfg.seed)?;
        (rest, y.clone(), r)
    } else {
        let (r, rest) = depth::reference_split(y, cfg.reference_fraction, cfg.seed)?;
        (x.clone(), rest, r)
    };
    let depth = DepthReference::new(&reference, cfg)?;
    let xs = depth.depths(&x_eval);
    let ys = depth.depths(&y_eval);
    let table = cache.get(xs.len(), ys.len(), generator, quantile)?;
    let stat = linear_rank_statistic(&xs, &ys, &generator)?.centered;
    let upper = table.p_value(stat);
    let lower = table.lower_p_value(stat + stat_tolerance(table.n));
    let p_value = (2.0 * upper.min(lower)).min(1.0);
    let mut report = baseline_report(
        "tukey",
        stat,
        table.quantile(alpha / 2.0)?,
        p_value,
        alpha,
        Sizes {
            n_train: x.len() - x_eval.len(),
            m_train: y.len() - y_eval.len(),
            n_test: xs.len(),
            m_test: ys.len(),
        },
        generator.descriptor(),
        format!("tukey-depth:{}", cfg.directions),
        cfg.seed,
    );
    report.reject = upper <= alpha / 2.0 || lower <= alpha / 2.0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: impl IntoIterator<Item = f64>) -> Sample {
        Sample::from_scalars(&v.into_iter().collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn separated_samples_reject() {
        let x = s((0..30).map(|i| f64::from(i) * 0.1));
        let y = s((0..30).map(|i| 50.0 + f64::from(i) * 0.1));
        let scheme = PermutationScheme {
            b_perm: 200,
            seed: 2,
        };
        for r in [
            mmd_test(&x, &y, &MmdBandwidth::Median, 0.05, &scheme).unwrap(),
            mmd_test(&x, &y, &MmdBandwidth::Grid(bandwidth_grid()), 0.05, &scheme).unwrap(),
            energy_test(&x, &y, 0.05, &scheme).unwrap(),
            fr_test(&x, &y, 0.05, &scheme).unwrap(),
        ] {
            assert!(r.reject, "{}", r.test);
            assert!((r.p_value - 1.0 / 201.0).abs() < 1e-15, "{}", r.test);
        }
    }

    #[test]
    fn fast_statistics_match_direct() {
        let x = Sample::from_rows(&[[0.1, 0.3], [1.2, -0.4], [0.5, 0.5], [2.0, 1.0]]).unwrap();
        let y = Sample::from_rows(&[[0.0, 0.0], [-1.0, 0.7], [0.3, 0.2]]).unwrap();
        let pooled = pool(&x, &y).unwrap();
        let idx: Vec<usize> = (0..7).collect();
        let k = PairMatrix::build(&pooled, gaussian_kernel(0.8));
        let fast = mmd_from_matrix(&k, &idx[..4], &idx[4..]);
        assert!((fast - mmd_unbiased(&x, &y, 0.8).unwrap()).abs() < 1e-14);
        // direct evaluation by definition
        let kf = gaussian_kernel(0.8);
        let mut direct = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    direct += kf(x.row(i), x.row(j)) / 12.0;
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    direct += kf(y.row(i), y.row(j)) / 6.0;
                }
            }
        }
        for i in 0..4 {
            for j in 0..3 {
                direct -= 2.0 * kf(x.row(i), y.row(j)) / 12.0;
            }
        }
        assert!((fast - direct).abs() < 1e-14);
    }

    #[test]
    fn depth_test_detects_outlying_sample() {
        let x = Sample::from_rows(
            &(0..60)
                .map(|i| {
                    let t = f64::from(i);
                    [(t * 0.37).sin(), (t * 0.73).cos()]
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let y = Sample::from_rows(
            &(0..30)
                .map(|i| [100.0 + f64::from(i), -50.0])
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let cache = NullTableCache::in_memory();
        let r = tukey_depth_test(
            &x,
            &y,
            ScoreGenerator::Mww,
            0.05,
            &DepthConfig::default(),
            QuantileMethod::default(),
            &cache,
        )
        .unwrap();
        assert!(r.reject);
        assert_eq!(r.sizes.n_test, 30);
        assert_eq!(r.sizes.m_test, 30);
    }
}
