use super::{ModelKind, Prepared, ScoringModel, TrainConfig, TrainOutcome};
use crate::error::Result;
use crate::numeric::dot;
use crate::sample::Sample;

/// Pairwise squared-hinge objective of a linear scorer and its gradient:
/// `(1/|P|) Σ max(0, 1 − ⟨w, zᵢ − zⱼ⟩)² + λ‖w‖²`.
pub fn squared_hinge_objective(
    weights: &[f64],
    rows: &[Vec<f64>],
    pairs: &[(usize, usize)],
    l2: f64,
) -> (f64, Vec<f64>) {
    let scores: Vec<f64> = rows.iter().map(|r| dot(weights, r)).collect();
    let inv = 1.0 / pairs.len() as f64;
    let mut loss = 0.0;
    // chain rule through the per-point scores
    let mut dscore = vec![0.0; rows.len()];
    for &(i, j) in pairs {
        let slack = 1.0 - (scores[i] - scores[j]);
        if slack > 0.0 {
            loss += slack * slack * inv;
            let g = -2.0 * slack * inv;
            dscore[i] += g;
            dscore[j] -= g;
        }
    }
    let mut grad: Vec<f64> = weights.iter().map(|w| 2.0 * l2 * w).collect();
    for (r, g) in rows.iter().zip(&dscore) {
        if *g != 0.0 {
            for (a, v) in grad.iter_mut().zip(r) {
                *a += g * v;
            }
        }
    }
    loss += l2 * dot(weights, weights);
    (loss, grad)
}

/// Linear pairwise ranker (RankSVM with squared hinge), trained by
/// gradient descent over the pairs sampled for each epoch.
pub fn train_linear_pairwise(x: &Sample, y: &Sample, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let prep = Prepared::new(x, y, cfg)?;
    if prep.degenerate {
        return Ok(TrainOutcome {
            model: ScoringModel::zero(prep.features),
            degenerate: true,
        });
    }
    let mut w = vec![0.0; prep.dim()];
    for epoch in 0..cfg.epochs {
        let pairs = prep.epoch_pairs(cfg, epoch);
        let (_, grad) = squared_hinge_objective(&w, &prep.rows, &pairs, cfg.l2_penalty);
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi -= cfg.learning_rate * g;
        }
    }
    Ok(TrainOutcome {
        model: ScoringModel {
            features: prep.features,
            kind: ModelKind::Linear {
                weights: w,
                bias: 0.0,
            },
        },
        degenerate: false,
    })
}
