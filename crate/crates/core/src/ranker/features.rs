use crate::sample::Sample;

/// Per-feature centering and scaling fitted on pooled training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

/// Input feature map: optional standardization, then optional quadratic
/// augmentation with every product `zᵢzⱼ`, `i ≤ j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub input_dim: usize,
    pub standardizer: Option<Standardizer>,
    pub quadratic: bool,
}

impl Features {
    pub fn identity(dim: usize) -> Self {
        Features {
            input_dim: dim,
            standardizer: None,
            quadratic: false,
        }
    }

    pub fn quadratic(dim: usize) -> Self {
        Features {
            input_dim: dim,
            standardizer: None,
            quadratic: true,
        }
    }

    pub fn fit(x: &Sample, y: &Sample, standardize: bool, quadratic: bool) -> Self {
        let d = x.dim();
        let standardizer = standardize.then(|| {
            let total = (x.len() + y.len()) as f64;
            let mut mean = vec![0.0; d];
            for r in x.rows().chain(y.rows()) {
                for (a, v) in mean.iter_mut().zip(r) {
                    *a += v;
                }
            }
            mean.iter_mut().for_each(|a| *a /= total);
            let mut var = vec![0.0; d];
            for r in x.rows().chain(y.rows()) {
                for ((a, v), mu) in var.iter_mut().zip(r).zip(&mean) {
                    *a += (v - mu) * (v - mu);
                }
            }
            let scale = var
                .into_iter()
                .map(|v| {
                    let s = (v / total).sqrt();
                    if s > 0.0 {
                        s
                    } else {
                        1.0
                    }
                })
                .collect();
            Standardizer { mean, scale }
        });
        Features {
            input_dim: d,
            standardizer,
            quadratic,
        }
    }

    pub fn output_dim(&self) -> usize {
        let d = self.input_dim;
        if self.quadratic {
            d + d * (d + 1) / 2
        } else {
            d
        }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let mut z: Vec<f64> = match &self.standardizer {
            Some(s) => x
                .iter()
                .zip(&s.mean)
                .zip(&s.scale)
                .map(|((v, m), sd)| (v - m) / sd)
                .collect(),
            None => x.to_vec(),
        };
        if self.quadratic {
            let d = z.len();
            z.reserve(d * (d + 1) / 2);
            for i in 0..d {
                for j in i..d {
                    z.push(z[i] * z[j]);
                }
            }
        }
        z
    }
}
