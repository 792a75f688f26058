//! Bipartite ranking: learning scoring functions that push the positive
//! sample above the negative one.
//!
//! Every trainer standardizes features with statistics of the pooled
//! training data (stored inside the model, so holdout points are scored with
//! training statistics only), optionally appends quadratic features, and is
//! bit-reproducible for a fixed seed.

mod boost;
mod features;
mod io;
mod linear;
mod mlp;
mod smoothed;

pub use boost::{train_boosted_pairwise, Stump};
pub use features::{Features, Standardizer};
pub use linear::{squared_hinge_objective, train_linear_pairwise};
pub use mlp::{pairwise_logistic_objective, train_mlp_pairwise, Mlp};
pub use smoothed::{smoothed_wphi_objective, train_smoothed_wphi};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rankstats::ScoreGenerator;
use crate::rng;
use crate::sample::Sample;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Linear {
        weights: Vec<f64>,
        bias: f64,
    },
    Mlp(Mlp),
    BoostedStumps(Vec<Stump>),
    /// Externally supplied linear coefficients (closed-form oracles).
    Fixed {
        weights: Vec<f64>,
        bias: f64,
    },
}

/// A trained or supplied scoring function `ℝ^d → ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringModel {
    pub features: Features,
    pub kind: ModelKind,
}

impl ScoringModel {
    pub fn input_dim(&self) -> usize {
        self.features.input_dim
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.features.input_dim {
            return invalid(format!(
                "model expects dimension {}, got {}",
                self.features.input_dim,
                x.len()
            ));
        }
        let z = self.features.transform(x);
        Ok(self.score_features(&z))
    }

    /// Scores an already transformed feature vector.
    pub(crate) fn score_features(&self, z: &[f64]) -> f64 {
        match &self.kind {
            ModelKind::Linear { weights, bias } | ModelKind::Fixed { weights, bias } => {
                crate::numeric::dot(weights, z) + bias
            }
            ModelKind::Mlp(net) => net.forward(z),
            ModelKind::BoostedStumps(stumps) => stumps.iter().map(|s| s.eval(z)).sum(),
        }
    }

    pub fn score_sample(&self, s: &Sample) -> Result<Vec<f64>> {
        s.rows().map(|r| self.score(r)).collect()
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ModelKind::Linear { .. } => "linear",
            ModelKind::Mlp(_) => "mlp",
            ModelKind::BoostedStumps(_) => "stumps",
            ModelKind::Fixed { .. } => "fixed",
        }
    }

    /// Linear model returning zero everywhere.
    pub fn zero(features: Features) -> Self {
        let d = features.output_dim();
        ScoringModel {
            features,
            kind: ModelKind::Linear {
                weights: vec![0.0; d],
                bias: 0.0,
            },
        }
    }

    pub fn to_text(&self) -> String {
        io::write_model(self)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        io::read_model(text)
    }
}

/// Trainer hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Gradient steps, or boosting stages.
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    /// Pairs sampled per epoch when `n'm'` exceeds it.
    pub pair_budget: usize,
    /// Sigmoid bandwidth of the smoothed rank criterion.
    pub bandwidth: f64,
    pub seed: u64,
    pub standardize: bool,
    pub augment_quadratic: bool,
    pub hidden_width: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            learning_rate: 0.05,
            l2_penalty: 1e-3,
            pair_budget: 20_000,
            bandwidth: 0.1,
            seed: 0,
            standardize: true,
            augment_quadratic: false,
            hidden_width: 16,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return invalid("learning rate must be positive");
        }
        if self.pair_budget == 0 {
            return invalid("pair budget must be at least 1");
        }
        if !(self.bandwidth > 0.0) {
            return invalid("bandwidth must be positive");
        }
        if !(self.l2_penalty >= 0.0) {
            return invalid("l2 penalty must be nonnegative");
        }
        if self.hidden_width == 0 {
            return invalid("hidden width must be at least 1");
        }
        Ok(())
    }
}

/// A trained model plus the degenerate-data flag raised when every
/// training point coincides (the model is then identically zero).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: ScoringModel,
    pub degenerate: bool,
}

/// Step-1 algorithm choice.
#[derive(Debug, Clone, PartialEq)]
pub enum Ranker {
    Linear(TrainConfig),
    Mlp(TrainConfig),
    Boosted(TrainConfig),
    SmoothedWphi(ScoreGenerator, TrainConfig),
    Fixed(ScoringModel),
}

impl Ranker {
    pub fn train(&self, x: &Sample, y: &Sample) -> Result<TrainOutcome> {
        match self {
            Ranker::Linear(cfg) => train_linear_pairwise(x, y, cfg),
            Ranker::Mlp(cfg) => train_mlp_pairwise(x, y, cfg),
            Ranker::Boosted(cfg) => train_boosted_pairwise(x, y, cfg),
            Ranker::SmoothedWphi(g, cfg) => train_smoothed_wphi(x, y, g, cfg),
            Ranker::Fixed(model) => {
                if model.input_dim() != x.dim() {
                    return invalid("fixed model dimension does not match the data");
                }
                Ok(TrainOutcome {
                    model: model.clone(),
                    degenerate: false,
                })
            }
        }
    }

    /// Same ranker with its seed replaced (fixed models are unchanged).
    pub fn reseeded(&self, seed: u64) -> Ranker {
        match self {
            Ranker::Linear(c) => Ranker::Linear(c.with_seed(seed)),
            Ranker::Mlp(c) => Ranker::Mlp(c.with_seed(seed)),
            Ranker::Boosted(c) => Ranker::Boosted(c.with_seed(seed)),
            Ranker::SmoothedWphi(g, c) => Ranker::SmoothedWphi(*g, c.with_seed(seed)),
            Ranker::Fixed(m) => Ranker::Fixed(m.clone()),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Ranker::Linear(_) => "linear".into(),
            Ranker::Mlp(c) => format!("mlp{}", c.hidden_width),
            Ranker::Boosted(_) => "boosted".into(),
            Ranker::SmoothedWphi(g, _) => format!("smoothed[{g}]"),
            Ranker::Fixed(_) => "fixed".into(),
        }
    }
}

/// Training data after feature mapping: positives first, then negatives.
pub(crate) struct Prepared {
    pub features: Features,
    pub rows: Vec<Vec<f64>>,
    pub n_pos: usize,
    pub degenerate: bool,
}

impl Prepared {
    pub fn new(x: &Sample, y: &Sample, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if x.is_empty() || y.is_empty() {
            return invalid("training samples must be non-empty");
        }
        if x.dim() != y.dim() {
            return invalid(format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
        }
        let first = x.row(0);
        let degenerate = x.rows().chain(y.rows()).all(|r| r == first);
        let features = Features::fit(x, y, cfg.standardize, cfg.augment_quadratic);
        let rows = x
            .rows()
            .chain(y.rows())
            .map(|r| features.transform(r))
            .collect();
        Ok(Prepared {
            features,
            rows,
            n_pos: x.len(),
            degenerate,
        })
    }

    pub fn n_neg(&self) -> usize {
        self.rows.len() - self.n_pos
    }

    pub fn dim(&self) -> usize {
        self.features.output_dim()
    }

    /// `(positive index, negative index into rows)` pairs for one epoch.
    pub fn epoch_pairs(&self, cfg: &TrainConfig, epoch: usize) -> Vec<(usize, usize)> {
        let (n, m) = (self.n_pos, self.n_neg());
        if n * m <= cfg.pair_budget {
            return (0..n)
                .flat_map(|i| (0..m).map(move |j| (i, n + j)))
                .collect();
        }
        let mut r = rng::derived_stream(cfg.seed, &[rng::tag("pairs"), epoch as u64]);
        (0..cfg.pair_budget)
            .map(|_| (r.random_range(0..n), n + r.random_range(0..m)))
            .collect()
    }
}
