use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numeric::dot;
use crate::rng;
use crate::sample::Sample;

/// Random-direction halfspace depth settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DepthConfig {
    pub directions: usize,
    pub seed: u64,
    /// Share of the larger sample used as the depth reference.
    pub reference_fraction: f64,
}

impl Default for DepthConfig {
    fn default() -> Self {
        DepthConfig {
            directions: 1000,
            seed: 0,
            reference_fraction: 0.5,
        }
    }
}

impl DepthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.directions == 0 {
            return invalid("at least one direction is required");
        }
        let f = self.reference_fraction;
        if !(f > 0.0 && f < 1.0) {
            return invalid(format!("reference fraction must lie in (0,1), got {f}"));
        }
        Ok(())
    }
}

/// Unit directions drawn uniformly on the sphere; the first `k` of a
/// longer draw with the same seed are the draw of length `k`. In one
/// dimension the single direction `+1` is exact.
pub fn directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if dim == 1 {
        return vec![vec![1.0]];
    }
    let mut r = rng::derived_stream(seed, &[rng::tag("directions")]);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| r.sample(StandardNormal)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 0.0 {
            out.push(v.into_iter().map(|c| c / norm).collect());
        }
    }
    out
}

/// Reference sample projected on each direction and sorted, so a depth
/// query costs `K·(d + log n)`.
#[derive(Debug, Clone)]
pub struct DepthReference {
    directions: Vec<Vec<f64>>,
    projections: Vec<Vec<f64>>,
    size: usize,
}

impl DepthReference {
    pub fn new(reference: &Sample, cfg: &DepthConfig) -> Result<Self> {
        cfg.validate()?;
        if reference.is_empty() {
            return invalid("depth reference must be non-empty");
        }
        let directions = directions(reference.dim(), cfg.directions, cfg.seed);
        let projections = directions
            .iter()
            .map(|u| {
                let mut p: Vec<f64> = reference.rows().map(|z| dot(u, z)).collect();
                p.sort_by(f64::total_cmp);
                p
            })
            .collect();
        Ok(DepthReference {
            directions,
            projections,
            size: reference.len(),
        })
    }

    /// Minimum over directions of the smaller closed halfspace mass at `x`.
    pub fn depth(&self, x: &[f64]) -> f64 {
        let mut least = self.size;
        for (u, proj) in self.directions.iter().zip(&self.projections) {
            let t = dot(u, x);
            let below = proj.partition_point(|&v| v <= t);
            let above = self.size - proj.partition_point(|&v| v < t);
            least = least.min(below.min(above));
            if least == 0 {
                break;
            }
        }
        least as f64 / self.size as f64
    }

    pub fn depths(&self, s: &Sample) -> Vec<f64> {
        s.rows().map(|r| self.depth(r)).collect()
    }
}

/// Approximate Tukey depth of `x` in `reference`.
pub fn tukey_depth(x: &[f64], reference: &Sample, cfg: &DepthConfig) -> Result<f64> {
    if x.len() != reference.dim() {
        return invalid("point and reference dimensions differ");
    }
    Ok(DepthReference::new(reference, cfg)?.depth(x))
}

/// Splits `s` into a reference part of `⌊fraction·len⌋` rows and the rest.
pub(crate) fn reference_split(s: &Sample, fraction: f64, seed: u64) -> Result<(Sample, Sample)> {
    let k = (fraction * s.len() as f64).floor() as usize;
    if k == 0 || k == s.len() {
        return invalid("reference split leaves an empty part");
    }
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.shuffle(&mut rng::derived_stream(
        seed,
        &[rng::tag("depth-reference")],
    ));
    Ok((s.select(&idx[..k]), s.select(&idx[k..])))
}
