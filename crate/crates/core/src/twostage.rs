//! The two-stage ranking test: split both samples, learn a scoring function
//! on the first halves, then run a rank test on the scored second halves.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::binomial;
use crate::ranker::{Ranker, ScoringModel};
use crate::rankstats::{
    linear_rank_statistic, stat_tolerance, NullTable, NullTableCache, QuantileMethod,
    ScoreGenerator, TableMethod, DEFAULT_EXACT_BUDGET, DEFAULT_MC_DRAWS,
};
use crate::rng;
use crate::roc::auc_pairwise;
use crate::sample::Sample;

/// How the two samples are divided into training and testing parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

impl SplitConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        SplitConfig { seed, ..self }
    }
}

/// Training (`'`) and testing (`''`) parts of both samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub x_train: Sample,
    pub y_train: Sample,
    pub x_test: Sample,
    pub y_test: Sample,
}

impl Split {
    pub fn sizes(&self) -> Sizes {
        Sizes {
            n_train: self.x_train.len(),
            m_train: self.y_train.len(),
            n_test: self.x_test.len(),
            m_test: self.y_test.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sizes {
    pub n_train: usize,
    pub m_train: usize,
    pub n_test: usize,
    pub m_test: usize,
}

/// Shuffles each sample with its own stream and keeps the first
/// `⌊fraction·size⌋` rows for training.
pub fn split_samples(x: &Sample, y: &Sample, cfg: &SplitConfig) -> Result<Split> {
    let f = cfg.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return invalid(format!("train fraction must lie in (0,1), got {f}"));
    }
    if x.dim() != y.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
    }
    let part = |s: &Sample, label: &str| -> Result<(Sample, Sample)> {
        let k = (f * s.len() as f64).floor() as usize;
        if k == 0 || k == s.len() {
            return invalid(format!(
                "splitting {} points at fraction {f} leaves an empty part",
                s.len()
            ));
        }
        let mut idx: Vec<usize> = (0..s.len()).collect();
        let mut r = rng::derived_stream(cfg.seed, &[rng::tag("split"), rng::tag(label)]);
        idx.shuffle(&mut r);
        Ok((s.select(&idx[..k]), s.select(&idx[k..])))
    };
    let (x_train, x_test) = part(x, "X")?;
    let (y_train, y_test) = part(y, "Y")?;
    Ok(Split {
        x_train,
        y_train,
        x_test,
        y_test,
    })
}

/// Outcome of one test, with the quantities needed to tabulate rejection
/// rates and p-value distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    /// `ranking` or `roc_sup`.
    pub test: String,
    /// Centered rank statistic, or the sup distance for the ROC test.
    pub statistic_centered: f64,
    pub quantile: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub sizes: Sizes,
    pub phi: String,
    pub ranker: String,
    pub seed: u64,
    /// The ranker saw identical training points and scores constantly.
    pub degenerate: bool,
    /// AUC of the holdout scores; absent for tests without a scoring step.
    pub holdout_auc: Option<f64>,
}

impl TestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Upper-tail rank test on already scored holdout samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankDecision {
    pub statistic_centered: f64,
    pub quantile: f64,
    pub p_value: f64,
    pub reject: bool,
}

pub fn rank_test_scores(
    x_scores: &[f64],
    y_scores: &[f64],
    table: &NullTable,
    alpha: f64,
) -> Result<RankDecision> {
    if table.n != x_scores.len() || table.m != y_scores.len() {
        return invalid(format!(
            "null table is for ({}, {}), scores have ({}, {})",
            table.n,
            table.m,
            x_scores.len(),
            y_scores.len()
        ));
    }
    let stat = linear_rank_statistic(x_scores, y_scores, &table.generator)?.centered;
    let quantile = table.quantile(alpha)?;
    Ok(RankDecision {
        statistic_centered: stat,
        quantile,
        p_value: table.p_value(stat),
        reject: stat > quantile + stat_tolerance(table.n),
    })
}

fn ranker_seed(split: &SplitConfig) -> u64 {
    rng::derive_seed(split.seed, &[rng::tag("ranker")])
}

/// Step 1 on the training halves and the holdout scores it produces.
pub struct Scored {
    pub split: Split,
    pub model: ScoringModel,
    pub degenerate: bool,
    pub x_scores: Vec<f64>,
    pub y_scores: Vec<f64>,
}

impl Scored {
    pub fn holdout_auc(&self) -> f64 {
        auc_pairwise(&self.y_scores, &self.x_scores).unwrap_or(0.5)
    }
}

/// Splits, trains the ranker (reseeded from the split seed) and scores the
/// holdout halves. The model sees only the training halves.
pub fn train_and_score(
    x: &Sample,
    y: &Sample,
    ranker: &Ranker,
    split_cfg: &SplitConfig,
) -> Result<Scored> {
    let split = split_samples(x, y, split_cfg)?;
    let out = ranker
        .reseeded(ranker_seed(split_cfg))
        .train(&split.x_train, &split.y_train)?;
    let x_scores = out.model.score_sample(&split.x_test)?;
    let y_scores = out.model.score_sample(&split.y_test)?;
    Ok(Scored {
        split,
        model: out.model,
        degenerate: out.degenerate,
        x_scores,
        y_scores,
    })
}

/// Ranking-based rank test configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingTest {
    pub ranker: Ranker,
    pub generator: ScoreGenerator,
    pub alpha: f64,
    pub split: SplitConfig,
    pub quantile: QuantileMethod,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0,1), got {alpha}"));
    }
    Ok(())
}

/// Rejects when the centered statistic of the scored holdout samples
/// exceeds the null quantile of its size.
pub fn ranking_test(
    x: &Sample,
    y: &Sample,
    cfg: &RankingTest,
    cache: &NullTableCache,
) -> Result<TestReport> {
    check_alpha(cfg.alpha)?;
    let scored = train_and_score(x, y, &cfg.ranker, &cfg.split)?;
    ranking_test_on_scores(&scored, cfg, cache)
}

/// Rank test step on an existing [`Scored`] split.
pub fn ranking_test_on_scores(
    scored: &Scored,
    cfg: &RankingTest,
    cache: &NullTableCache,
) -> Result<TestReport> {
    check_alpha(cfg.alpha)?;
    let sizes = scored.split.sizes();
    let table = cache.get(sizes.n_test, sizes.m_test, cfg.generator, cfg.quantile)?;
    let d = rank_test_scores(&scored.x_scores, &scored.y_scores, &table, cfg.alpha)?;
    Ok(TestReport {
        test: "ranking".into(),
        statistic_centered: d.statistic_centered,
        quantile: d.quantile,
        p_value: d.p_value,
        reject: d.reject,
        alpha: cfg.alpha,
        sizes,
        phi: cfg.generator.descriptor(),
        ranker: cfg.ranker.descriptor(),
        seed: cfg.split.seed,
        degenerate: scored.degenerate,
        holdout_auc: Some(scored.holdout_auc()),
    })
}

/// Null distribution of the sup distance between the empirical ROC curve
/// of `n` positives and `m` negatives and the diagonal, under uniformly
/// random rank orders. Distances are stored as integer numerators over
/// `n·m`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocRegionTable {
    pub n: usize,
    pub m: usize,
    pub method: TableMethod,
    /// `(numerator, probability)`, numerators increasing.
    pub support: Vec<(u64, f64)>,
}

impl RocRegionTable {
    pub fn value(&self, numerator: u64) -> f64 {
        numerator as f64 / (self.n * self.m) as f64
    }

    fn threshold_key(&self, alpha: f64) -> Result<u64> {
        check_alpha(alpha)?;
        let target = 1.0 - alpha - 1e-12;
        let mut cum = 0.0;
        for &(k, p) in &self.support {
            cum += p;
            if cum >= target {
                return Ok(k);
            }
        }
        Ok(self.support.last().map_or(0, |s| s.0))
    }

    /// `t_α`, the smallest tabulated distance with `P{D ≤ t} ≥ 1 − α`.
    pub fn threshold(&self, alpha: f64) -> Result<f64> {
        Ok(self.value(self.threshold_key(alpha)?))
    }

    pub fn thresholds(&self, alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
        alphas
            .iter()
            .map(|&a| Ok((a, self.threshold(a)?)))
            .collect()
    }

    /// `P{D ≥ observed}` for an observed numerator.
    pub fn p_value_key(&self, numerator: u64) -> f64 {
        self.support
            .iter()
            .filter(|(k, _)| *k >= numerator)
            .map(|(_, p)| p)
            .fold(0.0, |acc, p| acc + p)
            .min(1.0)
    }
}

/// Numerator of `sup |TPR − FPR|` over `n·m` for scored samples; tied
/// scores move both rates together.
pub fn sup_distance_numerator(neg: &[f64], pos: &[f64]) -> Result<u64> {
    if neg.is_empty() || pos.is_empty() {
        return invalid("both score samples must be non-empty");
    }
    let (m, n) = (neg.len() as i64, pos.len() as i64);
    let mut pooled: Vec<(f64, bool)> = neg
        .iter()
        .map(|&v| (v, false))
        .chain(pos.iter().map(|&v| (v, true)))
        .collect();
    pooled.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut fp, mut tp, mut best) = (0i64, 0i64, 0i64);
    let mut i = 0;
    while i < pooled.len() {
        let v = pooled[i].0;
        while i < pooled.len() && pooled[i].0 == v {
            if pooled[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        best = best.max((tp * m - fp * n).abs());
    }
    Ok(best as u64)
}

fn enumerate_sup(n: usize, m: usize, counts: &mut BTreeMap<u64, u64>) {
    fn walk(i: usize, j: usize, best: u64, n: usize, m: usize, counts: &mut BTreeMap<u64, u64>) {
        if i == n && j == m {
            *counts.entry(best).or_insert(0) += 1;
            return;
        }
        if i < n {
            let d = ((i + 1) * m).abs_diff(j * n) as u64;
            walk(i + 1, j, best.max(d), n, m, counts);
        }
        if j < m {
            let d = (i * m).abs_diff((j + 1) * n) as u64;
            walk(i, j + 1, best.max(d), n, m, counts);
        }
    }
    walk(0, 0, 0, n, m, counts);
}

/// Builds the sup-distance null table, exactly when `C(n+m, n)` fits the
/// method's budget and by Monte Carlo otherwise.
pub fn roc_null_table(n: usize, m: usize, method: QuantileMethod) -> Result<RocRegionTable> {
    if n == 0 || m == 0 {
        return invalid("sample sizes must be at least 1");
    }
    let resolved = method.resolve(n, m);
    let mut counts = BTreeMap::new();
    let total = match resolved {
        TableMethod::Exact => {
            let needed = binomial((n + m) as u64, n as u64);
            if needed > method.budget() {
                return Err(crate::Error::BudgetExceeded {
                    needed,
                    budget: method.budget(),
                });
            }
            enumerate_sup(n, m, &mut counts);
            needed as f64
        }
        TableMethod::MonteCarlo { draws, seed } => {
            if draws == 0 {
                return invalid("draw count must be positive");
            }
            let mut r = rng::derived_stream(seed, &[rng::tag("roc-null"), n as u64, m as u64]);
            let mut labels: Vec<bool> = (0..n + m).map(|k| k < n).collect();
            for _ in 0..draws {
                labels.shuffle(&mut r);
                let (mut i, mut j, mut best) = (0usize, 0usize, 0u64);
                for &pos in &labels {
                    if pos {
                        i += 1;
                    } else {
                        j += 1;
                    }
                    best = best.max((i * m).abs_diff(j * n) as u64);
                }
                *counts.entry(best).or_insert(0) += 1;
            }
            draws as f64
        }
    };
    Ok(RocRegionTable {
        n,
        m,
        method: resolved,
        support: counts
            .into_iter()
            .map(|(k, c)| (k, c as f64 / total))
            .collect(),
    })
}

/// Sup-distance region for one `(n'', m'')`, exact when `C(N'', n'')` is
/// at most the default budget and otherwise from `draws` Monte-Carlo rank
/// orders.
pub fn roc_null_threshold(n: usize, m: usize, draws: u64, seed: u64) -> Result<RocRegionTable> {
    if draws < 1000 {
        return invalid("at least 1000 draws are required");
    }
    roc_null_table(
        n,
        m,
        QuantileMethod::Auto {
            budget: DEFAULT_EXACT_BUDGET as u64,
            draws,
            seed,
        },
    )
}

/// Default Monte-Carlo settings for [`roc_null_threshold`].
pub fn default_roc_null(n: usize, m: usize) -> Result<RocRegionTable> {
    roc_null_threshold(n, m, DEFAULT_MC_DRAWS, 0)
}

/// Rejects when the holdout empirical ROC strays from the diagonal by more
/// than the region threshold in sup distance.
pub fn roc_space_test(
    x: &Sample,
    y: &Sample,
    ranker: &Ranker,
    alpha: f64,
    split: &SplitConfig,
    region: &RocRegionTable,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let scored = train_and_score(x, y, ranker, split)?;
    roc_space_test_on_scores(&scored, ranker, alpha, split, region)
}

pub fn roc_space_test_on_scores(
    scored: &Scored,
    ranker: &Ranker,
    alpha: f64,
    split: &SplitConfig,
    region: &RocRegionTable,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let sizes = scored.split.sizes();
    if region.n != sizes.n_test || region.m != sizes.m_test {
        return invalid(format!(
            "region is for ({}, {}), holdout sizes are ({}, {})",
            region.n, region.m, sizes.n_test, sizes.m_test
        ));
    }
    let key = sup_distance_numerator(&scored.y_scores, &scored.x_scores)?;
    let t_key = region.threshold_key(alpha)?;
    Ok(TestReport {
        test: "roc_sup".into(),
        statistic_centered: region.value(key),
        quantile: region.value(t_key),
        p_value: region.p_value_key(key),
        reject: key > t_key,
        alpha,
        sizes,
        phi: "sup".into(),
        ranker: ranker.descriptor(),
        seed: split.seed,
        degenerate: scored.degenerate,
        holdout_auc: Some(scored.holdout_auc()),
    })
}

/// Union of sub-tests whose levels add up to `alpha`.
pub fn combined_test(reports: &[TestReport], alpha: f64) -> Result<bool> {
    check_alpha(alpha)?;
    if reports.is_empty() {
        return invalid("at least one sub-test is required");
    }
    if reports.iter().any(|r| !(r.alpha > 0.0)) {
        return invalid("sub-test levels must be positive");
    }
    let total: f64 = reports.iter().map(|r| r.alpha).sum();
    if (total - alpha).abs() > 1e-9 {
        return invalid(format!("sub-test levels sum to {total}, expected {alpha}"));
    }
    Ok(reports.iter().any(|r| r.reject))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedReport {
    pub alpha: f64,
    pub reject: bool,
    pub parts: Vec<TestReport>,
}

/// One scoring function, several generators `φ_k` tested at levels `α_k`
/// on the same holdout scores.
pub fn combined_ranking_test(
    x: &Sample,
    y: &Sample,
    ranker: &Ranker,
    parts: &[(ScoreGenerator, f64)],
    alpha: f64,
    split: &SplitConfig,
    quantile: QuantileMethod,
    cache: &NullTableCache,
) -> Result<CombinedReport> {
    let scored = train_and_score(x, y, ranker, split)?;
    let reports = parts
        .iter()
        .map(|&(generator, a)| {
            let cfg = RankingTest {
                ranker: ranker.clone(),
                generator,
                alpha: a,
                split: *split,
                quantile,
            };
            ranking_test_on_scores(&scored, &cfg, cache)
        })
        .collect::<Result<Vec<_>>>()?;
    let reject = combined_test(&reports, alpha)?;
    Ok(CombinedReport {
        alpha,
        reject,
        parts: reports,
    })
}
