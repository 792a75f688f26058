use super::{ModelKind, Prepared, ScoringModel, TrainConfig, TrainOutcome};
use crate::error::Result;
use crate::numeric::logistic;
use crate::sample::Sample;

/// Depth-one tree: `weight * (left if z[feature] <= threshold else right)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left: f64,
    pub right: f64,
    pub weight: f64,
}

impl Stump {
    pub fn eval(&self, z: &[f64]) -> f64 {
        let leaf = if z[self.feature] <= self.threshold {
            self.left
        } else {
            self.right
        };
        self.weight * leaf
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    left: f64,
    right: f64,
    gain: f64,
}

/// Best single split of the residuals by second-order gain.
fn best_split(
    rows: &[Vec<f64>],
    orders: &[Vec<usize>],
    resid: &[f64],
    hess: &[f64],
    reg: f64,
) -> Option<Split> {
    let r_tot: f64 = resid.iter().sum();
    let h_tot: f64 = hess.iter().sum();
    let mut best: Option<Split> = None;
    for (f, order) in orders.iter().enumerate() {
        let (mut r_left, mut h_left) = (0.0, 0.0);
        for w in order.windows(2) {
            let (a, b) = (w[0], w[1]);
            r_left += resid[a];
            h_left += hess[a];
            let (va, vb) = (rows[a][f], rows[b][f]);
            if va == vb {
                continue;
            }
            let (r_right, h_right) = (r_tot - r_left, h_tot - h_left);
            let gain = r_left * r_left / (h_left + reg) + r_right * r_right / (h_right + reg);
            if best.as_ref().is_none_or(|s| gain > s.gain) {
                best = Some(Split {
                    feature: f,
                    threshold: va + (vb - va) / 2.0,
                    left: r_left / (h_left + reg),
                    right: r_right / (h_right + reg),
                    gain,
                });
            }
        }
    }
    best
}

/// Gradient boosting of stumps on the pairwise logistic loss. Each stage
/// fits one stump to the negative functional gradient over the epoch's
/// sampled pairs, with Newton leaf values shrunk by the learning rate.
pub fn train_boosted_pairwise(x: &Sample, y: &Sample, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let prep = Prepared::new(x, y, cfg)?;
    if prep.degenerate {
        return Ok(TrainOutcome {
            model: ScoringModel::zero(prep.features),
            degenerate: true,
        });
    }
    let rows = &prep.rows;
    let orders: Vec<Vec<usize>> = (0..prep.dim())
        .map(|f| {
            let mut o: Vec<usize> = (0..rows.len()).collect();
            o.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
            o
        })
        .collect();
    let mut scores = vec![0.0; rows.len()];
    let mut stumps = Vec::with_capacity(cfg.epochs);
    for stage in 0..cfg.epochs {
        let pairs = prep.epoch_pairs(cfg, stage);
        let inv = 1.0 / pairs.len() as f64;
        let mut resid = vec![0.0; rows.len()];
        let mut hess = vec![0.0; rows.len()];
        for &(i, j) in &pairs {
            let p = logistic(-(scores[i] - scores[j]));
            resid[i] += p * inv;
            resid[j] -= p * inv;
            let h = p * (1.0 - p) * inv;
            hess[i] += h;
            hess[j] += h;
        }
        let reg = 1e-12 + cfg.l2_penalty * hess.iter().sum::<f64>();
        let Some(split) = best_split(rows, &orders, &resid, &hess, reg) else {
            break;
        };
        let stump = Stump {
            feature: split.feature,
            threshold: split.threshold,
            left: split.left,
            right: split.right,
            weight: cfg.learning_rate,
        };
        for (s, z) in scores.iter_mut().zip(rows) {
            *s += stump.eval(z);
        }
        stumps.push(stump);
    }
    Ok(TrainOutcome {
        model: ScoringModel {
            features: prep.features,
            kind: ModelKind::BoostedStumps(stumps),
        },
        degenerate: false,
    })
}
