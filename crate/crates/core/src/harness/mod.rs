//! Config-driven Monte-Carlo experiments: replicate data generation and
//! every configured test, aggregate rejection frequencies over a grid of
//! levels, and emit tables, plots and a JSON report.

mod config;
mod emit;

pub use config::{
    ExperimentConfig, MethodSpec, ModelGrid, RankerKind, DESK_N_TOTAL, PAPER_N_TOTAL,
};
pub use emit::{emit_outputs, five_number_summary, write_timing, OutputFormat};

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    energy_test, fr_test, mmd_test, tukey_depth_test, DepthConfig, PermutationScheme,
};
use crate::error::Result;
use crate::ranker::{Ranker, TrainConfig};
use crate::rankstats::{stat_tolerance, NullTableCache, QuantileMethod};
use crate::rng::{self, derive_seed};
use crate::sample::Sample;
use crate::synthdata::{generate, oracle_scorer, ModelSpec};
use crate::twostage::{
    rank_test_scores, roc_null_table, sup_distance_numerator, train_and_score, RocRegionTable,
    SplitConfig,
};

/// How the replications share data across methods.
pub const PAIRING_NOTE: &str =
    "each replication draws one data set that every method tests (paired design)";

/// Rejection frequency at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub alpha: f64,
    pub frequency: f64,
    /// `2√(f(1−f)/B)`, the binomial 95% half-width.
    pub half_width: f64,
    /// `√(f(1−f))`, the per-replication standard deviation.
    pub sd: f64,
}

impl Rate {
    fn new(alpha: f64, rejections: usize, total: usize) -> Self {
        let f = if total == 0 {
            0.0
        } else {
            rejections as f64 / total as f64
        };
        let sd = (f * (1.0 - f)).sqrt();
        Rate {
            alpha,
            frequency: f,
            half_width: if total == 0 {
                0.0
            } else {
                2.0 * sd / (total as f64).sqrt()
            },
            sd,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub replication: usize,
    pub message: String,
}

/// Results of one method on one model cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub model: ModelSpec,
    pub method: String,
    /// Successful replications.
    pub replications: usize,
    pub rates: Vec<Rate>,
    /// p-values of the successful replications, in replication order.
    pub p_values: Vec<f64>,
    /// Data seed of every replication.
    pub seeds: Vec<u64>,
    pub failures: Vec<Failure>,
    pub mean_holdout_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub pairing: String,
    /// Some cell recorded a failure.
    pub partial: bool,
    pub cells: Vec<CellReport>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn cell(&self, method: &str, epsilon: f64) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.model.epsilon == epsilon)
    }
}

/// Per-replication outcome of one method.
#[derive(Debug, Clone, PartialEq)]
struct Outcome {
    p_value: f64,
    rejects: Vec<bool>,
    holdout_auc: Option<f64>,
}

/// Shared read-mostly tables.
struct Tables {
    null: NullTableCache,
    regions: Mutex<HashMap<(usize, usize), Arc<RocRegionTable>>>,
    quantile: QuantileMethod,
}

impl Tables {
    fn region(&self, n: usize, m: usize) -> Result<Arc<RocRegionTable>> {
        if let Some(t) = self.regions.lock().expect("region lock").get(&(n, m)) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(roc_null_table(n, m, self.quantile)?);
        let mut guard = self.regions.lock().expect("region lock");
        Ok(Arc::clone(guard.entry((n, m)).or_insert(t)))
    }
}

fn build_ranker(
    kind: RankerKind,
    train: &TrainConfig,
    phi: Option<crate::rankstats::ScoreGenerator>,
    model: &ModelSpec,
) -> Result<Ranker> {
    Ok(match kind {
        RankerKind::Linear => Ranker::Linear(*train),
        RankerKind::Mlp => Ranker::Mlp(*train),
        RankerKind::Boosted => Ranker::Boosted(*train),
        RankerKind::Smoothed => {
            Ranker::SmoothedWphi(phi.unwrap_or(crate::rankstats::ScoreGenerator::Mww), *train)
        }
        RankerKind::Oracle => Ranker::Fixed(oracle_scorer(model)?),
    })
}

fn run_method(
    method: &MethodSpec,
    model: &ModelSpec,
    x: &Sample,
    y: &Sample,
    cfg: &ExperimentConfig,
    seed: u64,
    tables: &Tables,
) -> Result<Outcome> {
    let alphas = &cfg.alphas;
    let split = SplitConfig {
        train_fraction: cfg.train_fraction,
        seed,
    };
    let scheme = PermutationScheme {
        b_perm: cfg.b_perm,
        seed,
    };
    let by_p = |p: f64| alphas.iter().map(|&a| p <= a).collect();
    // the baselines report a level-free p-value; 0.05 only fills the report
    let level = 0.05;
    match method {
        MethodSpec::Ranking { ranker, phi, train } => {
            let r = build_ranker(*ranker, train, Some(*phi), model)?;
            let scored = train_and_score(x, y, &r, &split)?;
            let s = scored.split.sizes();
            let table = tables.null.get(s.n_test, s.m_test, *phi, tables.quantile)?;
            let d = rank_test_scores(&scored.x_scores, &scored.y_scores, &table, level)?;
            let tol = stat_tolerance(table.n);
            let rejects = alphas
                .iter()
                .map(|&a| Ok(d.statistic_centered > table.quantile(a)? + tol))
                .collect::<Result<_>>()?;
            Ok(Outcome {
                p_value: d.p_value,
                rejects,
                holdout_auc: Some(scored.holdout_auc()),
            })
        }
        MethodSpec::RocSup { ranker, train } => {
            let r = build_ranker(*ranker, train, None, model)?;
            let scored = train_and_score(x, y, &r, &split)?;
            let s = scored.split.sizes();
            let region = tables.region(s.n_test, s.m_test)?;
            let key = sup_distance_numerator(&scored.y_scores, &scored.x_scores)?;
            let d = region.value(key);
            let rejects = alphas
                .iter()
                .map(|&a| Ok(d > region.threshold(a)?))
                .collect::<Result<_>>()?;
            Ok(Outcome {
                p_value: region.p_value_key(key),
                rejects,
                holdout_auc: Some(scored.holdout_auc()),
            })
        }
        MethodSpec::Combined {
            ranker,
            phis,
            train,
        } => {
            let r = build_ranker(*ranker, train, phis.first().copied(), model)?;
            let scored = train_and_score(x, y, &r, &split)?;
            let s = scored.split.sizes();
            let k = phis.len() as f64;
            let mut rejects = vec![false; alphas.len()];
            let mut min_p = 1.0f64;
            for phi in phis {
                let table = tables.null.get(s.n_test, s.m_test, *phi, tables.quantile)?;
                let d = rank_test_scores(&scored.x_scores, &scored.y_scores, &table, level)?;
                min_p = min_p.min(d.p_value);
                let tol = stat_tolerance(table.n);
                for (rej, &a) in rejects.iter_mut().zip(alphas) {
                    *rej |= d.statistic_centered > table.quantile(a / k)? + tol;
                }
            }
            Ok(Outcome {
                p_value: (k * min_p).min(1.0),
                rejects,
                holdout_auc: Some(scored.holdout_auc()),
            })
        }
        MethodSpec::Mmd { bandwidth } => {
            let r = mmd_test(x, y, bandwidth, level, &scheme)?;
            Ok(Outcome {
                p_value: r.p_value,
                rejects: by_p(r.p_value),
                holdout_auc: None,
            })
        }
        MethodSpec::Energy => {
            let r = energy_test(x, y, level, &scheme)?;
            Ok(Outcome {
                p_value: r.p_value,
                rejects: by_p(r.p_value),
                holdout_auc: None,
            })
        }
        MethodSpec::Fr => {
            let r = fr_test(x, y, level, &scheme)?;
            Ok(Outcome {
                p_value: r.p_value,
                rejects: by_p(r.p_value),
                holdout_auc: None,
            })
        }
        MethodSpec::Tukey { phi } => {
            let depth = DepthConfig {
                directions: cfg.depth_directions,
                seed,
                reference_fraction: 0.5,
            };
            let r = tukey_depth_test(x, y, *phi, level, &depth, tables.quantile, &tables.null)?;
            Ok(Outcome {
                p_value: r.p_value,
                rejects: by_p(r.p_value),
                holdout_auc: None,
            })
        }
    }
}

/// Data seed of replication `rep` in model cell `(grid, eps)`.
pub fn data_seed(master: u64, grid: usize, eps: usize, rep: usize) -> u64 {
    derive_seed(
        master,
        &[rng::tag("data"), grid as u64, eps as u64, rep as u64],
    )
}

/// Seed of a method in that replication. Methods are keyed by name and
/// by their ordinal among equally named methods, so adding or removing
/// other methods leaves their streams unchanged.
pub fn method_seed(
    master: u64,
    method: &str,
    ordinal: usize,
    grid: usize,
    eps: usize,
    rep: usize,
) -> u64 {
    derive_seed(
        master,
        &[
            rng::tag("method"),
            rng::tag(method),
            ordinal as u64,
            grid as u64,
            eps as u64,
            rep as u64,
        ],
    )
}

/// Runs every (model, ε, method) cell for `cfg.replications` replications.
/// Replications run in parallel; results are reduced in index order so the
/// report does not depend on the worker count. A failing method is
/// recorded in its cell and the run continues.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with_cache(cfg, NullTableCache::in_memory())
}

pub fn run_experiment_with_cache(
    cfg: &ExperimentConfig,
    cache: NullTableCache,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let tables = Tables {
        null: cache,
        regions: Mutex::new(HashMap::new()),
        quantile: cfg.quantile,
    };
    let (n, m) = cfg.sizes();
    let mut cells_spec = Vec::new();
    for (gi, grid) in cfg.models.iter().enumerate() {
        for (ei, spec) in grid.specs()?.into_iter().enumerate() {
            cells_spec.push((gi, ei, spec));
        }
    }
    let keys: Vec<(String, usize)> = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let name = m.name();
            let ordinal = cfg.methods[..i].iter().filter(|o| o.name() == name).count();
            (name, ordinal)
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cells_spec.len())
        .flat_map(|c| (0..cfg.replications).map(move |r| (c, r)))
        .collect();
    let results: Vec<Vec<std::result::Result<Outcome, String>>> = jobs
        .par_iter()
        .map(|&(c, rep)| {
            let (gi, ei, spec) = &cells_spec[c];
            let data = generate(spec, n, m, data_seed(cfg.seed, *gi, *ei, rep));
            cfg.methods
                .iter()
                .enumerate()
                .map(|(mi, method)| {
                    let (x, y) = data.as_ref().map_err(|e| e.to_string())?;
                    let (name, ordinal) = &keys[mi];
                    let seed = method_seed(cfg.seed, name, *ordinal, *gi, *ei, rep);
                    run_method(method, spec, x, y, cfg, seed, &tables).map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::new();
    for (c, (gi, ei, spec)) in cells_spec.iter().enumerate() {
        let rows = &results[c * cfg.replications..(c + 1) * cfg.replications];
        let seeds: Vec<u64> = (0..cfg.replications)
            .map(|r| data_seed(cfg.seed, *gi, *ei, r))
            .collect();
        for (mi, method) in cfg.methods.iter().enumerate() {
            let mut p_values = Vec::new();
            let mut failures = Vec::new();
            let mut counts = vec![0usize; cfg.alphas.len()];
            let mut aucs = Vec::new();
            for (rep, row) in rows.iter().enumerate() {
                match &row[mi] {
                    Ok(o) => {
                        p_values.push(o.p_value);
                        for (c, r) in counts.iter_mut().zip(&o.rejects) {
                            *c += usize::from(*r);
                        }
                        aucs.extend(o.holdout_auc);
                    }
                    Err(message) => failures.push(Failure {
                        replication: rep,
                        message: message.clone(),
                    }),
                }
            }
            let ok = p_values.len();
            cells.push(CellReport {
                model: *spec,
                method: method.name(),
                replications: ok,
                rates: cfg
                    .alphas
                    .iter()
                    .zip(&counts)
                    .map(|(&a, &k)| Rate::new(a, k, ok))
                    .collect(),
                p_values,
                seeds: seeds.clone(),
                failures,
                mean_holdout_auc: (!aucs.is_empty())
                    .then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
            });
        }
    }
    Ok(ExperimentReport {
        name: cfg.name.clone(),
        config: cfg.clone(),
        pairing: PAIRING_NOTE.into(),
        partial: cells.iter().any(|c| !c.failures.is_empty()),
        cells,
    })
}

/// [`run_experiment`] plus its wall-clock duration in seconds, which is
/// kept out of the report so the report stays reproducible.
pub fn run_experiment_timed(cfg: &ExperimentConfig) -> Result<(ExperimentReport, f64)> {
    let start = Instant::now();
    let report = run_experiment(cfg)?;
    Ok((report, start.elapsed().as_secs_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::Family;

    fn small(methods: Vec<MethodSpec>, eps: Vec<f64>, b: usize) -> ExperimentConfig {
        ExperimentConfig {
            name: "t".into(),
            seed: 5,
            n_total: 60,
            positive_fraction: 0.5,
            replications: b,
            alphas: vec![0.05, 0.2],
            train_fraction: 0.8,
            b_perm: 50,
            depth_directions: 50,
            quantile: QuantileMethod::default(),
            models: vec![ModelGrid {
                family: Family::L1Minus,
                dim: 4,
                epsilons: eps,
            }],
            methods,
            output_dir: None,
        }
    }

    fn linear() -> MethodSpec {
        MethodSpec::Ranking {
            ranker: RankerKind::Linear,
            phi: crate::rankstats::ScoreGenerator::Mww,
            train: TrainConfig {
                epochs: 20,
                ..TrainConfig::default()
            },
        }
    }

    #[test]
    fn one_replication_one_p_value() {
        let cfg = small(vec![linear()], vec![0.0], 1);
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.cells[0].p_values.len(), 1);
        assert_eq!(r.cells[0].rates.len(), 2);
        assert!(!r.partial);
    }

    #[test]
    fn deterministic_and_isolated() {
        let methods = vec![
            linear(),
            MethodSpec::Ranking {
                ranker: RankerKind::Oracle,
                phi: crate::rankstats::ScoreGenerator::Mww,
                train: TrainConfig::default(),
            },
            MethodSpec::Energy,
            MethodSpec::RocSup {
                ranker: RankerKind::Oracle,
                train: TrainConfig::default(),
            },
        ];
        let cfg = small(methods, vec![0.0, 1.0], 3);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        // dropping a method leaves the others untouched
        let mut fewer = cfg.clone();
        fewer.methods.remove(1);
        let c = run_experiment(&fewer).unwrap();
        assert_eq!(a.cell("energy", 1.0), c.cell("energy", 1.0));
        assert_eq!(
            a.cell("rank[linear,mww]", 0.0),
            c.cell("rank[linear,mww]", 0.0)
        );
    }

    #[test]
    fn failures_are_recorded_per_cell() {
        let mut cfg = small(vec![linear(), MethodSpec::Energy], vec![0.1], 2);
        cfg.models.push(ModelGrid {
            family: Family::L1Plus,
            dim: 4,
            epsilons: vec![0.1],
        });
        let r = run_experiment(&cfg).unwrap();
        assert!(r.partial);
        let plus: Vec<_> = r
            .cells
            .iter()
            .filter(|c| c.model.family == Family::L1Plus)
            .collect();
        assert!(plus
            .iter()
            .all(|c| c.failures.len() == 2 && c.replications == 0));
        let minus = r.cell("energy", 0.1).unwrap();
        assert!(minus.failures.is_empty());
    }

    #[test]
    fn rate_half_widths() {
        let r = Rate::new(0.05, 5, 100);
        assert!((r.frequency - 0.05).abs() < 1e-15);
        assert!((r.half_width - 2.0 * (0.05f64 * 0.95 / 100.0).sqrt()).abs() < 1e-15);
        assert!((r.sd - (0.05f64 * 0.95).sqrt()).abs() < 1e-15);
    }
}
