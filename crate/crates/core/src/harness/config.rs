use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::MmdBandwidth;
use crate::error::{Error, Result};
use crate::ranker::TrainConfig;
use crate::rankstats::{QuantileMethod, ScoreGenerator};
use crate::synthdata::{Family, ModelSpec};

/// A model family at one dimension and its grid of discrepancies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelGrid {
    pub family: Family,
    pub dim: usize,
    pub epsilons: Vec<f64>,
}

impl ModelGrid {
    pub fn specs(&self) -> Result<Vec<ModelSpec>> {
        self.epsilons
            .iter()
            .map(|&e| ModelSpec::new(self.family, self.dim, e))
            .collect()
    }
}

/// Step-1 learner of a ranking-based method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankerKind {
    Linear,
    Mlp,
    Boosted,
    /// Direct ascent on the smoothed rank criterion of the test's `φ`.
    Smoothed,
    /// Closed-form optimal scorer of the data-generating model.
    Oracle,
}

impl RankerKind {
    pub fn name(&self) -> &'static str {
        match self {
            RankerKind::Linear => "linear",
            RankerKind::Mlp => "mlp",
            RankerKind::Boosted => "boosted",
            RankerKind::Smoothed => "smoothed",
            RankerKind::Oracle => "oracle",
        }
    }
}

/// One test applied to every replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Ranking {
        ranker: RankerKind,
        phi: ScoreGenerator,
        #[serde(default)]
        train: TrainConfig,
    },
    RocSup {
        ranker: RankerKind,
        #[serde(default)]
        train: TrainConfig,
    },
    /// Several generators on one scoring function, level split evenly.
    Combined {
        ranker: RankerKind,
        phis: Vec<ScoreGenerator>,
        #[serde(default)]
        train: TrainConfig,
    },
    Mmd {
        #[serde(default)]
        bandwidth: MmdBandwidth,
    },
    Energy,
    Fr,
    Tukey {
        phi: ScoreGenerator,
    },
}

impl MethodSpec {
    pub fn name(&self) -> String {
        match self {
            MethodSpec::Ranking { ranker, phi, .. } => format!("rank[{},{phi}]", ranker.name()),
            MethodSpec::RocSup { ranker, .. } => format!("rocsup[{}]", ranker.name()),
            MethodSpec::Combined { ranker, phis, .. } => {
                let list: Vec<String> = phis.iter().map(|p| p.to_string()).collect();
                format!("combined[{},{}]", ranker.name(), list.join("+"))
            }
            MethodSpec::Mmd { bandwidth } => match bandwidth {
                MmdBandwidth::Median => "mmd".into(),
                MmdBandwidth::Fixed(b) => format!("mmd[{b}]"),
                MmdBandwidth::Grid(_) => "mmd[grid]".into(),
            },
            MethodSpec::Energy => "energy".into(),
            MethodSpec::Fr => "fr".into(),
            MethodSpec::Tukey { phi } => format!("tukey[{phi}]"),
        }
    }
}

fn default_name() -> String {
    "experiment".into()
}
fn default_n_total() -> usize {
    DESK_N_TOTAL
}
fn default_fraction() -> f64 {
    0.5
}
fn default_replications() -> usize {
    100
}
fn default_alphas() -> Vec<f64> {
    vec![0.01, 0.05, 0.1]
}
fn default_train_fraction() -> f64 {
    0.8
}
fn default_b_perm() -> usize {
    1000
}
fn default_directions() -> usize {
    1000
}

/// Pooled sample size of the desk profile.
pub const DESK_N_TOTAL: usize = 400;
/// Pooled sample size of the full-scale profile.
pub const PAPER_N_TOTAL: usize = 2000;

/// Monte-Carlo experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Pooled size `N = n + m`.
    #[serde(default = "default_n_total")]
    pub n_total: usize,
    /// `p = n / N`.
    #[serde(default = "default_fraction")]
    pub positive_fraction: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_b_perm")]
    pub b_perm: usize,
    #[serde(default = "default_directions")]
    pub depth_directions: usize,
    #[serde(default)]
    pub quantile: QuantileMethod,
    pub models: Vec<ModelGrid>,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Switches to the full-scale pooled size.
    pub fn paper_scale(mut self) -> Self {
        self.n_total = PAPER_N_TOTAL;
        self
    }

    pub fn sizes(&self) -> (usize, usize) {
        let n = (self.positive_fraction * self.n_total as f64).round() as usize;
        (n, self.n_total - n)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad(format!("alpha {a} is outside (0,1)"));
        }
        if !(self.positive_fraction > 0.0 && self.positive_fraction < 1.0) {
            return bad("positive fraction must lie in (0,1)".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train fraction must lie in (0,1)".into());
        }
        let (n, m) = self.sizes();
        let part = |k: usize| (self.train_fraction * k as f64).floor() as usize;
        if n < 2 || m < 2 || part(n) == 0 || part(m) == 0 || part(n) == n || part(m) == m {
            return bad(format!("sizes ({n}, {m}) cannot be split"));
        }
        if self.b_perm == 0 || self.depth_directions == 0 {
            return bad("b_perm and depth_directions must be at least 1".into());
        }
        if self.models.is_empty() || self.methods.is_empty() {
            return bad("at least one model and one method are required".into());
        }
        for g in &self.models {
            g.specs().map_err(|e| Error::Config(e.to_string()))?;
        }
        for method in &self.methods {
            match method {
                MethodSpec::Ranking { train, .. }
                | MethodSpec::RocSup { train, .. }
                | MethodSpec::Combined { train, .. } => {
                    train.validate().map_err(|e| Error::Config(e.to_string()))?
                }
                _ => {}
            }
            if let MethodSpec::Combined { phis, .. } = method {
                if phis.is_empty() {
                    return bad("combined method needs at least one generator".into());
                }
            }
            if let MethodSpec::Ranking {
                ranker: RankerKind::Smoothed,
                phi,
                ..
            } = method
            {
                if !phi.is_smooth() {
                    return bad(format!("smoothed ranker cannot optimize {phi}"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
name = "demo"
seed = 3
replications = 2
alphas = [0.05]

[[models]]
family = "L1minus"
dim = 4
epsilons = [0.0, 0.3]

[[methods]]
kind = "ranking"
ranker = "linear"
phi = "mww"

[[methods]]
kind = "ranking"
ranker = "mlp"
phi = "rtb:0.9"
train = { hidden_width = 8, epochs = 20 }

[[methods]]
kind = "mmd"

[[methods]]
kind = "tukey"
phi = "mww"
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.n_total, DESK_N_TOTAL);
        assert_eq!(cfg.sizes(), (200, 200));
        assert_eq!(cfg.methods[1].name(), "rank[mlp,rtb:0.9]");
        let MethodSpec::Ranking { train, .. } = &cfg.methods[1] else {
            panic!()
        };
        assert_eq!(train.hidden_width, 8);
        assert_eq!(train.learning_rate, TrainConfig::default().learning_rate);
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_alpha = EXAMPLE.replace("alphas = [0.05]", "alphas = [1.5]");
        assert!(matches!(
            ExperimentConfig::from_toml(&bad_alpha),
            Err(Error::Config(_))
        ));
        let zero_b = EXAMPLE.replace("replications = 2", "replications = 0");
        assert!(ExperimentConfig::from_toml(&zero_b).is_err());
        let unknown = EXAMPLE.replace("kind = \"mmd\"", "kind = \"wilcoxon\"");
        assert!(ExperimentConfig::from_toml(&unknown).is_err());
        let dim = EXAMPLE.replace("dim = 4", "dim = 5");
        assert!(ExperimentConfig::from_toml(&dim).is_err());
    }
}
