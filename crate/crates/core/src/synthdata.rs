//! Synthetic two-sample problems: Gaussian location and scale models and
//! heavy-tailed variants, with closed-form optimal scorers where they exist.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ranker::{Features, ModelKind, ScoringModel};
use crate::rng::{self, Rng};
use crate::roc::{auc_pairwise, GaussianOracle};
use crate::sample::{Provenance, Role, Sample};

/// Baseline correlation of the decreasing-correlation model.
pub const S1_BETA: f64 = 0.2;
/// Baseline correlation of the equicorrelated model.
pub const S2_BETA: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Gaussian location shift; first coordinate negatively correlated with
    /// the others, which are mutually independent.
    #[serde(rename = "L1minus")]
    L1Minus,
    /// Gaussian location shift with positively correlated coordinates.
    #[serde(rename = "L1plus")]
    L1Plus,
    /// Gaussian scale, `Σ_ij = a^|i−j|`.
    S1,
    /// Gaussian scale, equicorrelated.
    S2,
    /// Cauchy, first two coordinates of X shifted.
    T1,
    /// Exponential of the L1minus model.
    T2,
    /// Exponential of the S1 model.
    T3,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::L1Minus => "L1minus",
            Family::L1Plus => "L1plus",
            Family::S1 => "S1",
            Family::S2 => "S2",
            Family::T1 => "T1",
            Family::T2 => "T2",
            Family::T3 => "T3",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Family::L1Minus,
            Family::L1Plus,
            Family::S1,
            Family::S2,
            Family::T1,
            Family::T2,
            Family::T3,
        ];
        all.into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown model family `{s}`")))
    }
}

/// A synthetic two-sample problem; `epsilon = 0` is the null hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub dim: usize,
    pub epsilon: f64,
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(d={},eps={})",
            self.family.name(),
            self.dim,
            self.epsilon
        )
    }
}

impl ModelSpec {
    pub fn new(family: Family, dim: usize, epsilon: f64) -> Result<Self> {
        let spec = ModelSpec {
            family,
            dim,
            epsilon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn l1_minus(dim: usize, epsilon: f64) -> Result<Self> {
        Self::new(Family::L1Minus, dim, epsilon)
    }

    pub fn s1(dim: usize, epsilon: f64) -> Result<Self> {
        Self::new(Family::S1, dim, epsilon)
    }

    pub fn s2(dim: usize, epsilon: f64) -> Result<Self> {
        Self::new(Family::S2, dim, epsilon)
    }

    pub fn t1(epsilon: f64) -> Result<Self> {
        Self::new(Family::T1, 3, epsilon)
    }

    pub fn t2(dim: usize, epsilon: f64) -> Result<Self> {
        Self::new(Family::T2, dim, epsilon)
    }

    pub fn t3(dim: usize, epsilon: f64) -> Result<Self> {
        Self::new(Family::T3, dim, epsilon)
    }

    /// Same model with another discrepancy.
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        ModelSpec { epsilon, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return invalid(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon
            ));
        }
        let d = self.dim;
        let ok = match self.family {
            Family::L1Minus | Family::L1Plus | Family::T2 => d == 4 || d == 6,
            Family::T1 => d == 3,
            Family::S1 | Family::S2 | Family::T3 => d >= 1,
        };
        if !ok {
            return invalid(format!(
                "dimension {d} is not available for {}",
                self.family.name()
            ));
        }
        Ok(())
    }

    /// Correlation parameter of the positive sample in the scale models.
    fn alpha(&self) -> f64 {
        match self.family {
            Family::S1 | Family::T3 => S1_BETA + self.epsilon,
            Family::S2 => S2_BETA + self.epsilon,
            _ => 0.0,
        }
    }
}

/// Symmetric matrix from its main diagonal and superdiagonals.
pub fn banded_symmetric(diagonals: &[&[f64]]) -> Result<DMatrix<f64>> {
    let d = diagonals.first().map_or(0, |v| v.len());
    if d == 0 {
        return invalid("empty diagonal");
    }
    if diagonals.len() > d {
        return invalid("more bands than the dimension allows");
    }
    let mut m = DMatrix::zeros(d, d);
    for (k, band) in diagonals.iter().enumerate() {
        if band.len() != d - k {
            return invalid(format!(
                "band {k} has {} entries, expected {}",
                band.len(),
                d - k
            ));
        }
        for (i, v) in band.iter().enumerate() {
            m[(i, i + k)] = *v;
            m[(i + k, i)] = *v;
        }
    }
    Ok(m)
}

/// `Σ_ij = a^|i−j|`.
pub fn decreasing_correlation(d: usize, a: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| a.powi(i.abs_diff(j) as i32))
}

/// `(1−a)I + a11ᵀ`.
pub fn equicorrelation(d: usize, a: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { a })
}

fn l1_bands(family: Family, d: usize) -> Vec<&'static [f64]> {
    match (family, d) {
        (Family::L1Minus, 4) => vec![&[2., 6., 1., 5.], &[-1., 0., 0.], &[-1., 0.], &[-1.]],
        (Family::L1Minus, _) => vec![
            &[2., 6., 1., 5., 4., 3.],
            &[-1., 0., 0., 0., 0.],
            // printed with three entries in the source table; padded with 0
            &[-1., 0., 0., 0.],
            &[-1., 0., 0.],
            &[-1., 0.],
            &[-1.],
        ],
        (_, 4) => vec![&[6., 4., 5., 3.], &[-2., 4., 2.], &[-3., 0.], &[-2.]],
        (_, _) => vec![
            &[6., 5., 5., 3., 2., 3.],
            &[-2., 4., 2., 1., 0.],
            &[-3., 0., 0., 1.],
            &[-2., 1., 1.],
            &[-3., 2.],
            &[-2.],
        ],
    }
}

fn cholesky(m: DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    m.cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::Model(format!("{what} covariance is not positive definite")))
}

/// Covariance of the Gaussian model underlying `spec` for one role (the
/// log-scale covariance for the lognormal families). Fails with a model
/// error when the matrix is not positive definite.
pub fn build_covariance(spec: &ModelSpec, role: Role) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let d = spec.dim;
    let m = match spec.family {
        Family::L1Minus | Family::L1Plus => banded_symmetric(&l1_bands(spec.family, d))?,
        Family::T2 => banded_symmetric(&l1_bands(Family::L1Minus, d))?,
        Family::S1 | Family::T3 => {
            let a = if role == Role::X {
                spec.alpha()
            } else {
                S1_BETA
            };
            decreasing_correlation(d, a)
        }
        Family::S2 => {
            let a = if role == Role::X {
                spec.alpha()
            } else {
                S2_BETA
            };
            equicorrelation(d, a)
        }
        Family::T1 => {
            return Err(Error::NoClosedFormOracle(
                "Cauchy model has no covariance".into(),
            ))
        }
    };
    cholesky(m.clone(), spec.family.name())?;
    Ok(m)
}

/// One of the two generating distributions of a model.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// `μ + L·z`, `z ~ N(0, I)`.
    Gaussian { mean: Vec<f64>, chol: DMatrix<f64> },
    /// Componentwise `exp` of a Gaussian.
    LogGaussian { mean: Vec<f64>, chol: DMatrix<f64> },
    /// Independent `Cauchy(locᵢ, 1)` coordinates.
    Cauchy { loc: Vec<f64> },
}

impl Distribution {
    pub fn dim(&self) -> usize {
        match self {
            Distribution::Gaussian { mean, .. } | Distribution::LogGaussian { mean, .. } => {
                mean.len()
            }
            Distribution::Cauchy { loc } => loc.len(),
        }
    }

    fn gaussian_row(mean: &[f64], chol: &DMatrix<f64>, rng: &mut Rng, out: &mut Vec<f64>) {
        let d = mean.len();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for i in 0..d {
            let mut v = mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                v += chol[(i, j)] * zj;
            }
            out.push(v);
        }
    }

    /// `n` independent draws. Non-finite draws are regenerated.
    pub fn draw(&self, n: usize, rng: &mut Rng) -> Sample {
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        let mut row = Vec::with_capacity(d);
        while data.len() < n * d {
            row.clear();
            match self {
                Distribution::Gaussian { mean, chol } => {
                    Self::gaussian_row(mean, chol, rng, &mut row)
                }
                Distribution::LogGaussian { mean, chol } => {
                    Self::gaussian_row(mean, chol, rng, &mut row);
                    row.iter_mut().for_each(|v| *v = v.exp());
                }
                Distribution::Cauchy { loc } => {
                    for l in loc {
                        let u: f64 = rng.random();
                        row.push(l + (std::f64::consts::PI * (u - 0.5)).tan());
                    }
                }
            }
            if row.iter().all(|v| v.is_finite()) {
                data.extend_from_slice(&row);
            }
        }
        Sample::new(d, data).expect("rows have the declared dimension")
    }
}

/// The `(X, Y)` generating distributions. Under `epsilon = 0` both roles
/// share the same object.
pub fn distributions(spec: &ModelSpec) -> Result<(Arc<Distribution>, Arc<Distribution>)> {
    spec.validate()?;
    let d = spec.dim;
    let null = spec.epsilon == 0.0;
    let shift = vec![spec.epsilon / (d as f64).sqrt(); d];
    let zero = vec![0.0; d];
    let y = match spec.family {
        Family::L1Minus | Family::L1Plus | Family::S1 | Family::S2 => Distribution::Gaussian {
            mean: zero.clone(),
            chol: cholesky(build_covariance(spec, Role::Y)?, spec.family.name())?,
        },
        Family::T2 | Family::T3 => Distribution::LogGaussian {
            mean: zero.clone(),
            chol: cholesky(build_covariance(spec, Role::Y)?, spec.family.name())?,
        },
        Family::T1 => Distribution::Cauchy { loc: zero.clone() },
    };
    let y = Arc::new(y);
    if null {
        return Ok((y.clone(), y));
    }
    let x = match (spec.family, &*y) {
        (Family::L1Minus | Family::L1Plus, Distribution::Gaussian { chol, .. }) => {
            Distribution::Gaussian {
                mean: shift,
                chol: chol.clone(),
            }
        }
        (Family::T2, Distribution::LogGaussian { chol, .. }) => Distribution::LogGaussian {
            mean: shift,
            chol: chol.clone(),
        },
        (Family::S1 | Family::S2, _) => Distribution::Gaussian {
            mean: zero,
            chol: cholesky(build_covariance(spec, Role::X)?, spec.family.name())?,
        },
        (Family::T3, _) => Distribution::LogGaussian {
            mean: zero,
            chol: cholesky(build_covariance(spec, Role::X)?, spec.family.name())?,
        },
        (Family::T1, _) => Distribution::Cauchy {
            loc: vec![spec.epsilon, spec.epsilon, 0.0],
        },
        _ => unreachable!("role distributions are built from the same family"),
    };
    Ok((Arc::new(x), y))
}

/// Draws `n` points from the X distribution and `m` from the Y
/// distribution, each from its own stream derived from `seed` and the role.
pub fn generate(spec: &ModelSpec, n: usize, m: usize, seed: u64) -> Result<(Sample, Sample)> {
    if n == 0 || m == 0 {
        return invalid("sample sizes must be at least 1");
    }
    let (dx, dy) = distributions(spec)?;
    let draw = |dist: &Distribution, size, role: Role| {
        let label = if role == Role::X { "X" } else { "Y" };
        let mut r = rng::derived_stream(seed, &[rng::tag(label)]);
        dist.draw(size, &mut r).with_provenance(Provenance {
            model: spec.to_string(),
            role,
            seed,
        })
    };
    Ok((draw(&dx, n, Role::X), draw(&dy, m, Role::Y)))
}

/// Orientation of the quadratic scale-model oracle `⟨x, θx⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleSign {
    /// `θ = Σ_Y⁻¹ − Σ_X⁻¹`, increasing in the likelihood ratio `dP_X/dP_Y`.
    LikelihoodRatio,
    /// `θ = Σ_X⁻¹ − Σ_Y⁻¹`, the opposite orientation.
    Reversed,
}

/// Closed-form Gaussian oracle of a location model.
pub fn gaussian_oracle(spec: &ModelSpec) -> Result<GaussianOracle> {
    match spec.family {
        Family::L1Minus | Family::L1Plus => {
            let d = spec.dim;
            let delta = vec![spec.epsilon / (d as f64).sqrt(); d];
            GaussianOracle::new(delta, build_covariance(spec, Role::Y)?)
        }
        _ => Err(Error::NoClosedFormOracle(format!(
            "{} is not a Gaussian location model",
            spec.family.name()
        ))),
    }
}

/// Optimal scorer of a Gaussian model: `⟨x, Γ⁻¹δ⟩` for location models,
/// `⟨x, θx⟩` with likelihood-ratio orientation for scale models.
pub fn oracle_scorer(spec: &ModelSpec) -> Result<ScoringModel> {
    oracle_scorer_with_sign(spec, OracleSign::LikelihoodRatio)
}

pub fn oracle_scorer_with_sign(spec: &ModelSpec, sign: OracleSign) -> Result<ScoringModel> {
    spec.validate()?;
    let d = spec.dim;
    match spec.family {
        Family::L1Minus | Family::L1Plus => {
            let oracle = gaussian_oracle(spec)?;
            Ok(ScoringModel {
                features: Features::identity(d),
                kind: ModelKind::Fixed {
                    weights: oracle.direction().to_vec(),
                    bias: 0.0,
                },
            })
        }
        Family::S1 | Family::S2 => {
            let inv = |role| -> Result<DMatrix<f64>> {
                let c = build_covariance(spec, role)?;
                c.cholesky()
                    .map(|c| c.inverse())
                    .ok_or_else(|| Error::Model("covariance is not invertible".into()))
            };
            let mut theta = inv(Role::Y)? - inv(Role::X)?;
            if sign == OracleSign::Reversed {
                theta = -theta;
            }
            let features = Features::quadratic(d);
            let mut weights = vec![0.0; d];
            for i in 0..d {
                for j in i..d {
                    let w = if i == j {
                        theta[(i, i)]
                    } else {
                        2.0 * theta[(i, j)]
                    };
                    // exact zeros under the null
                    weights.push(if spec.epsilon == 0.0 { 0.0 } else { w });
                }
            }
            Ok(ScoringModel {
                features,
                kind: ModelKind::Fixed { weights, bias: 0.0 },
            })
        }
        Family::T1 | Family::T2 | Family::T3 => Err(Error::NoClosedFormOracle(spec.to_string())),
    }
}

/// Picks the scale-oracle orientation whose AUC on the given holdout data
/// is at least one half, preferring the likelihood-ratio sign on ties.
pub fn select_oracle_sign(spec: &ModelSpec, x: &Sample, y: &Sample) -> Result<OracleSign> {
    let model = oracle_scorer_with_sign(spec, OracleSign::LikelihoodRatio)?;
    let auc = auc_pairwise(&model.score_sample(y)?, &model.score_sample(x)?)?;
    Ok(if auc >= 0.5 {
        OracleSign::LikelihoodRatio
    } else {
        OracleSign::Reversed
    })
}

/// Metadata written next to exported samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub model: ModelSpec,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub prng: String,
}

/// Writes `<prefix>_x.csv`, `<prefix>_y.csv` and `<prefix>_meta.json`.
pub fn export(
    dir: &Path,
    prefix: &str,
    spec: &ModelSpec,
    seed: u64,
    x: &Sample,
    y: &Sample,
    header: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let xs = dir.join(format!("{prefix}_x.csv"));
    let ys = dir.join(format!("{prefix}_y.csv"));
    let meta = dir.join(format!("{prefix}_meta.json"));
    x.write_csv(&xs, header)?;
    y.write_csv(&ys, header)?;
    let md = SampleMetadata {
        model: *spec,
        n: x.len(),
        m: y.len(),
        seed,
        prng: rng::PRNG_NAME.to_string(),
    };
    let json = serde_json::to_string_pretty(&md).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(&meta, json + "\n")?;
    Ok(vec![xs, ys, meta])
}

/// Mean vector and covariance of a sample (divisor `n`).
pub fn sample_moments(s: &Sample) -> (DVector<f64>, DMatrix<f64>) {
    let d = s.dim();
    let mean = DVector::from_vec(s.mean());
    let mut cov = DMatrix::zeros(d, d);
    for r in s.rows() {
        let c = DVector::from_column_slice(r) - &mean;
        cov += &c * c.transpose();
    }
    cov /= s.len() as f64;
    (mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_minus_bands() {
        let s = build_covariance(&ModelSpec::l1_minus(4, 0.0).unwrap(), Role::X).unwrap();
        let expect = [
            [2., -1., -1., -1.],
            [-1., 6., 0., 0.],
            [-1., 0., 1., 0.],
            [-1., 0., 0., 5.],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s[(i, j)], expect[i][j]);
            }
        }
        assert!(build_covariance(&ModelSpec::l1_minus(6, 0.0).unwrap(), Role::X).is_ok());
    }

    #[test]
    fn l1_plus_is_rejected() {
        for d in [4, 6] {
            let spec = ModelSpec::new(Family::L1Plus, d, 0.1).unwrap();
            assert!(matches!(
                build_covariance(&spec, Role::X),
                Err(Error::Model(_))
            ));
            assert!(matches!(generate(&spec, 3, 3, 1), Err(Error::Model(_))));
        }
    }

    #[test]
    fn scale_covariances() {
        let s = decreasing_correlation(3, 0.2);
        let e = [[1.0, 0.2, 0.04], [0.2, 1.0, 0.2], [0.04, 0.2, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((s[(i, j)] - e[i][j]).abs() < 1e-15);
            }
        }
        assert_eq!(equicorrelation(4, 0.0), DMatrix::identity(4, 4));
    }

    #[test]
    fn rejects_unlisted_dimensions() {
        assert!(ModelSpec::l1_minus(5, 0.1).is_err());
        assert!(ModelSpec::new(Family::T1, 4, 0.1).is_err());
        assert!(ModelSpec::s1(20, -0.1).is_err());
    }

    #[test]
    fn null_shares_one_distribution() {
        for f in [
            Family::L1Minus,
            Family::S1,
            Family::S2,
            Family::T1,
            Family::T2,
            Family::T3,
        ] {
            let d = match f {
                Family::T1 => 3,
                Family::L1Minus | Family::T2 => 4,
                _ => 5,
            };
            let (a, b) = distributions(&ModelSpec::new(f, d, 0.0).unwrap()).unwrap();
            assert!(Arc::ptr_eq(&a, &b), "{f:?}");
            let (a, b) = distributions(&ModelSpec::new(f, d, 0.1).unwrap()).unwrap();
            assert!(!Arc::ptr_eq(&a, &b));
        }
    }

    #[test]
    fn deterministic_and_role_separated() {
        let spec = ModelSpec::s2(5, 0.1).unwrap();
        let (x1, y1) = generate(&spec, 20, 30, 9).unwrap();
        let (x2, y2) = generate(&spec, 20, 30, 9).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(y1, y2);
        let (x3, _) = generate(&spec, 20, 30, 10).unwrap();
        assert_ne!(x1, x3);
        assert_eq!(x1.provenance.as_ref().unwrap().role, Role::X);
    }

    #[test]
    fn oracle_shapes() {
        let m = oracle_scorer(&ModelSpec::l1_minus(4, 0.0).unwrap()).unwrap();
        assert_eq!(m.score(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 0.0);
        let m = oracle_scorer(&ModelSpec::s1(3, 0.2).unwrap()).unwrap();
        assert_eq!(m.features.output_dim(), 9);
        // larger correlation in X: the oracle favors aligned coordinates
        assert!(m.score(&[1.0, 1.0, 1.0]).unwrap() > m.score(&[1.0, -1.0, 1.0]).unwrap());
        assert!(matches!(
            oracle_scorer(&ModelSpec::t1(0.1).unwrap()),
            Err(Error::NoClosedFormOracle(_))
        ));
    }

    #[test]
    fn quadratic_oracle_matches_matrix_form() {
        let spec = ModelSpec::s2(3, 0.15).unwrap();
        let m = oracle_scorer(&spec).unwrap();
        let inv = |r| build_covariance(&spec, r).unwrap().try_inverse().unwrap();
        let theta = inv(Role::Y) - inv(Role::X);
        let x = DVector::from_vec(vec![0.3, -1.2, 0.8]);
        let direct = x.dot(&(&theta * &x));
        assert!((m.score(x.as_slice()).unwrap() - direct).abs() < 1e-12);
        let r = oracle_scorer_with_sign(&spec, OracleSign::Reversed).unwrap();
        assert!((r.score(x.as_slice()).unwrap() + direct).abs() < 1e-12);
    }

    #[test]
    fn export_writes_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ModelSpec::t1(0.1).unwrap();
        let (x, y) = generate(&spec, 4, 5, 2).unwrap();
        let files = export(dir.path(), "t1", &spec, 2, &x, &y, true).unwrap();
        assert_eq!(
            Sample::read_csv(&files[0]).unwrap().as_slice(),
            x.as_slice()
        );
        let meta: SampleMetadata =
            serde_json::from_str(&std::fs::read_to_string(&files[2]).unwrap()).unwrap();
        assert_eq!(meta.seed, 2);
        assert_eq!(meta.m, 5);
        assert_eq!(meta.prng, rng::PRNG_NAME);
    }
}
