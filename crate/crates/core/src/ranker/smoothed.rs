use super::{ModelKind, Prepared, ScoringModel, TrainConfig, TrainOutcome};
use crate::error::{invalid, Error, Result};
use crate::numeric::{dot, logistic};
use crate::rankstats::ScoreGenerator;
use crate::sample::Sample;

/// Smoothed rank criterion of a linear scorer and its gradient in `w`:
/// `(1/n) Σᵢ φ(R̃ᵢ/(N+1)) − λ‖w‖²`, where `R̃ᵢ = ½ + Σ_z σ((sᵢ − s_z)/h)`
/// runs over all pooled rows (itself included) and the first `n_pos` rows
/// are the positives.
pub fn smoothed_wphi_objective(
    weights: &[f64],
    rows: &[Vec<f64>],
    n_pos: usize,
    generator: &ScoreGenerator,
    bandwidth: f64,
    l2: f64,
) -> Result<(f64, Vec<f64>)> {
    if !generator.is_smooth() {
        return Err(Error::UnsupportedGenerator(format!(
            "{generator} is not differentiable"
        )));
    }
    if !(bandwidth > 0.0) {
        return invalid("bandwidth must be positive");
    }
    if n_pos == 0 || n_pos > rows.len() {
        return invalid("positive count out of range");
    }
    let scores: Vec<f64> = rows.iter().map(|r| dot(weights, r)).collect();
    let denom = (rows.len() + 1) as f64;
    let inv_n = 1.0 / n_pos as f64;
    let mut value = 0.0;
    let mut dscore = vec![0.0; rows.len()];
    for i in 0..n_pos {
        let mut rank = 0.5;
        let mut slopes = Vec::with_capacity(rows.len());
        for &sz in &scores {
            let p = logistic((scores[i] - sz) / bandwidth);
            rank += p;
            slopes.push(p * (1.0 - p) / bandwidth);
        }
        let u = rank / denom;
        value += generator.eval(u) * inv_n;
        let c = generator.derivative(u).unwrap_or(0.0) * inv_n / denom;
        for (z, s) in slopes.iter().enumerate() {
            let t = c * s;
            dscore[i] += t;
            dscore[z] -= t;
        }
    }
    let mut grad: Vec<f64> = weights.iter().map(|w| -2.0 * l2 * w).collect();
    for (r, g) in rows.iter().zip(&dscore) {
        if *g != 0.0 {
            for (a, v) in grad.iter_mut().zip(r) {
                *a += g * v;
            }
        }
    }
    value -= l2 * dot(weights, weights);
    Ok((value, grad))
}

/// Linear scorer maximizing the smoothed rank criterion by gradient ascent
/// from `w = 0`.
pub fn train_smoothed_wphi(
    x: &Sample,
    y: &Sample,
    generator: &ScoreGenerator,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    if !generator.is_smooth() {
        return Err(Error::UnsupportedGenerator(format!(
            "{generator} is not differentiable"
        )));
    }
    let prep = Prepared::new(x, y, cfg)?;
    if prep.degenerate {
        return Ok(TrainOutcome {
            model: ScoringModel::zero(prep.features),
            degenerate: true,
        });
    }
    let mut w = vec![0.0; prep.dim()];
    for _ in 0..cfg.epochs {
        let (_, grad) = smoothed_wphi_objective(
            &w,
            &prep.rows,
            prep.n_pos,
            generator,
            cfg.bandwidth,
            cfg.l2_penalty,
        )?;
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi += cfg.learning_rate * g;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankstats::linear_rank_statistic;

    fn rows_1d(x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
        x.iter().chain(y).map(|v| vec![*v]).collect()
    }

    #[test]
    fn rejects_rtb_and_bad_bandwidth() {
        let x = Sample::from_scalars(&[1.0, 2.0]).unwrap();
        let rtb = ScoreGenerator::rtb(0.8).unwrap();
        let err = train_smoothed_wphi(&x, &x, &rtb, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedGenerator(_)));
        let rows = rows_1d(&[1.0], &[0.0]);
        let err = smoothed_wphi_objective(&[1.0], &rows, 1, &ScoreGenerator::Mww, 0.0, 0.0);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn small_bandwidth_recovers_exact_statistic() {
        let x = [0.3, 1.7, -0.2, 2.4];
        let y = [0.1, -1.1, 0.9];
        let rows = rows_1d(&x, &y);
        for g in [ScoreGenerator::Mww, ScoreGenerator::power(2.0).unwrap()] {
            let (v, _) = smoothed_wphi_objective(&[1.0], &rows, x.len(), &g, 1e-4, 0.0).unwrap();
            let exact = linear_rank_statistic(&x, &y, &g).unwrap().raw / x.len() as f64;
            assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
        }
    }

    #[test]
    fn flat_sigmoid_has_vanishing_gradient() {
        let rows = rows_1d(&[0.3, 1.7, -0.2], &[0.1, -1.1]);
        let (v, g) =
            smoothed_wphi_objective(&[1.0], &rows, 3, &ScoreGenerator::Mww, 1e9, 0.0).unwrap();
        assert!(g[0].abs() < 1e-8);
        // every smoothed rank is N/2 + 1/2
        assert!((v - 3.0 / 6.0).abs() < 1e-8);
    }

    #[test]
    fn ascent_is_monotone() {
        let x: Vec<f64> = (0..12)
            .map(|i| 0.6 + ((i * 7) % 12) as f64 / 6.0 - 1.0)
            .collect();
        let y: Vec<f64> = (0..12).map(|i| ((i * 5) % 12) as f64 / 6.0 - 1.0).collect();
        let rows = rows_1d(&x, &y);
        let g = ScoreGenerator::Mww;
        let mut w = vec![0.0];
        let mut last = f64::NEG_INFINITY;
        for _ in 0..50 {
            let (v, grad) = smoothed_wphi_objective(&w, &rows, 12, &g, 0.1, 1e-3).unwrap();
            assert!(v >= last - 1e-12);
            last = v;
            w[0] += 0.05 * grad[0];
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rows = vec![
            vec![0.3, -1.2, 0.5],
            vec![1.1, 0.4, -0.3],
            vec![-0.7, 0.9, 0.2],
            vec![0.05, 0.1, -1.4],
            vec![0.6, -0.5, 0.8],
        ];
        let w = [0.4, -0.3, 0.9];
        for g in [ScoreGenerator::Mww, ScoreGenerator::power(3.0).unwrap()] {
            let f = |w: &[f64]| smoothed_wphi_objective(w, &rows, 2, &g, 0.5, 0.01).unwrap();
            let (_, grad) = f(&w);
            for k in 0..3 {
                let h = 1e-6;
                let (mut wp, mut wm) = (w, w);
                wp[k] += h;
                wm[k] -= h;
                let fd = (f(&wp).0 - f(&wm).0) / (2.0 * h);
                assert!((fd - grad[k]).abs() <= 1e-6 * (1.0 + grad[k].abs()));
            }
        }
    }

    #[test]
    fn trained_direction_follows_shift() {
        let x = Sample::from_scalars(&[1.2, 2.0, 0.7, 1.5]).unwrap();
        let y = Sample::from_scalars(&[0.1, -0.4, 0.6, 0.0]).unwrap();
        let out =
            train_smoothed_wphi(&x, &y, &ScoreGenerator::Mww, &TrainConfig::default()).unwrap();
        let ModelKind::Linear { weights, .. } = &out.model.kind else {
            panic!("linear model expected")
        };
        assert!(weights[0] > 0.0);
    }
}
