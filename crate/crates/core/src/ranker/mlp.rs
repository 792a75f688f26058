use rand_distr::{Distribution, Normal};

use super::{ModelKind, Prepared, ScoringModel, TrainConfig, TrainOutcome};
use crate::error::Result;
use crate::numeric::{logistic, softplus};
use crate::rng;
use crate::sample::Sample;

/// One-hidden-layer tanh network `s(z) = w2·tanh(W1 z + b1) + b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub input_dim: usize,
    pub width: usize,
    /// Row-major `width x input_dim`.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl Mlp {
    pub fn zeros(input_dim: usize, width: usize) -> Self {
        Mlp {
            input_dim,
            width,
            w1: vec![0.0; width * input_dim],
            b1: vec![0.0; width],
            w2: vec![0.0; width],
            b2: 0.0,
        }
    }

    /// Gaussian initialization scaled by fan-in.
    pub fn seeded(input_dim: usize, width: usize, seed: u64) -> Self {
        let mut r = rng::derived_stream(seed, &[rng::tag("mlp-init")]);
        let n1 = Normal::new(0.0, 1.0 / (input_dim as f64).sqrt()).expect("positive sd");
        let n2 = Normal::new(0.0, 1.0 / (width as f64).sqrt()).expect("positive sd");
        let mut net = Mlp::zeros(input_dim, width);
        net.w1.iter_mut().for_each(|w| *w = n1.sample(&mut r));
        net.w2.iter_mut().for_each(|w| *w = n2.sample(&mut r));
        net
    }

    fn hidden(&self, z: &[f64]) -> Vec<f64> {
        self.w1
            .chunks_exact(self.input_dim)
            .zip(&self.b1)
            .map(|(row, b)| (crate::numeric::dot(row, z) + b).tanh())
            .collect()
    }

    pub fn forward(&self, z: &[f64]) -> f64 {
        crate::numeric::dot(&self.w2, &self.hidden(z)) + self.b2
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Flat parameter vector `[W1, b1, w2, b2]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        p.extend_from_slice(&self.w1);
        p.extend_from_slice(&self.b1);
        p.extend_from_slice(&self.w2);
        p.push(self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let (a, rest) = p.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.width);
        let (c, rest) = rest.split_at(self.width);
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2 = rest[0];
    }
}

/// Pairwise logistic loss `(1/|P|) Σ log(1 + exp(−(s(zᵢ) − s(zⱼ))))` plus
/// `λ(‖W1‖² + ‖w2‖²)`, with its gradient in [`Mlp::params`] layout.
pub fn pairwise_logistic_objective(
    net: &Mlp,
    rows: &[Vec<f64>],
    pairs: &[(usize, usize)],
    l2: f64,
) -> (f64, Vec<f64>) {
    let hidden: Vec<Vec<f64>> = rows.iter().map(|z| net.hidden(z)).collect();
    let scores: Vec<f64> = hidden
        .iter()
        .map(|h| crate::numeric::dot(&net.w2, h) + net.b2)
        .collect();
    let inv = 1.0 / pairs.len() as f64;
    let mut loss = 0.0;
    let mut dscore = vec![0.0; rows.len()];
    for &(i, j) in pairs {
        let diff = scores[i] - scores[j];
        loss += softplus(-diff) * inv;
        let g = -logistic(-diff) * inv;
        dscore[i] += g;
        dscore[j] -= g;
    }
    let (d, w) = (net.input_dim, net.width);
    let mut gw1 = vec![0.0; w * d];
    let mut gb1 = vec![0.0; w];
    let mut gw2 = vec![0.0; w];
    let mut gb2 = 0.0;
    for ((z, h), &g) in rows.iter().zip(&hidden).zip(&dscore) {
        if g == 0.0 {
            continue;
        }
        gb2 += g;
        for k in 0..w {
            gw2[k] += g * h[k];
            let pre = g * net.w2[k] * (1.0 - h[k] * h[k]);
            gb1[k] += pre;
            for (a, v) in gw1[k * d..(k + 1) * d].iter_mut().zip(z) {
                *a += pre * v;
            }
        }
    }
    for (a, v) in gw1.iter_mut().zip(&net.w1) {
        *a += 2.0 * l2 * v;
    }
    for (a, v) in gw2.iter_mut().zip(&net.w2) {
        *a += 2.0 * l2 * v;
    }
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    loss += l2 * (sq(&net.w1) + sq(&net.w2));
    let mut grad = gw1;
    grad.extend(gb1);
    grad.extend(gw2);
    grad.push(gb2);
    (loss, grad)
}

/// Adam moments for a flat parameter vector.
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = Self::B1 * *m + (1.0 - Self::B1) * g;
            *v = Self::B2 * *v + (1.0 - Self::B2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

/// RankNet-style pairwise ranker: a tanh network trained with Adam on the
/// pairwise logistic loss.
pub fn train_mlp_pairwise(x: &Sample, y: &Sample, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let prep = Prepared::new(x, y, cfg)?;
    let mut net = Mlp::seeded(prep.dim(), cfg.hidden_width, cfg.seed);
    if prep.degenerate {
        return Ok(TrainOutcome {
            model: ScoringModel::zero(prep.features),
            degenerate: true,
        });
    }
    let mut params = net.params();
    let mut adam = Adam::new(params.len());
    for epoch in 0..cfg.epochs {
        let pairs = prep.epoch_pairs(cfg, epoch);
        let (_, grad) = pairwise_logistic_objective(&net, &prep.rows, &pairs, cfg.l2_penalty);
        adam.step(&mut params, &grad, cfg.learning_rate);
        net.set_params(&params);
    }
    Ok(TrainOutcome {
        model: ScoringModel {
            features: prep.features,
            kind: ModelKind::Mlp(net),
        },
        degenerate: false,
    })
}
