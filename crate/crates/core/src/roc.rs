//! Empirical and theoretical ROC curves.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::numeric::{normal_cdf, normal_quantile};

/// Anything that can be evaluated as a ROC curve `α ↦ ROC(α)` on `[0, 1]`.
pub trait RocFn {
    fn eval(&self, alpha: f64) -> f64;

    /// Interior abscissae where the curve is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> RocFn for F {
    fn eval(&self, alpha: f64) -> f64 {
        self(alpha)
    }
}

/// Piecewise-linear monotone curve from `(0,0)` to `(1,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RocMetric {
    L1,
    Sup,
}

impl RocCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return invalid("a ROC curve needs at least two points");
        }
        if points[0] != (0.0, 0.0) || *points.last().unwrap() != (1.0, 1.0) {
            return invalid("a ROC curve runs from (0,0) to (1,1)");
        }
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if points.iter().any(|&(f, t)| !in_unit(f) || !in_unit(t)) {
            return invalid("ROC coordinates must lie in [0,1]");
        }
        if points
            .windows(2)
            .any(|w| w[1].0 < w[0].0 || w[1].1 < w[0].1)
        {
            return invalid("ROC breakpoints must be nondecreasing");
        }
        Ok(RocCurve { points })
    }

    pub fn diagonal() -> Self {
        RocCurve {
            points: vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Mirror image across the main diagonal.
    pub fn reflect(&self) -> RocCurve {
        RocCurve {
            points: self.points.iter().map(|&(f, t)| (t, f)).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (f, t) in &self.points {
            let _ = writeln!(out, "{f:?},{t:?}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut pts = Vec::new();
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let (f, t) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad ROC row `{line}`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad ROC value `{s}`: {e}")))
            };
            pts.push((parse(f)?, parse(t)?));
        }
        RocCurve::new(pts)
    }
}

impl RocFn for RocCurve {
    /// Linear interpolation; on vertical segments the upper value is used.
    fn eval(&self, alpha: f64) -> f64 {
        let a = alpha.clamp(0.0, 1.0);
        let i = self.points.partition_point(|&(f, _)| f <= a) - 1;
        let (f0, t0) = self.points[i];
        if f0 == a || i + 1 == self.points.len() {
            return t0;
        }
        let (f1, t1) = self.points[i + 1];
        t0 + (t1 - t0) * (a - f0) / (f1 - f0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .points
            .iter()
            .map(|p| p.0)
            .filter(|&f| f > 0.0 && f < 1.0)
            .collect();
        b.dedup();
        b
    }
}

fn check_nonempty(neg: &[f64], pos: &[f64]) -> Result<()> {
    if neg.is_empty() || pos.is_empty() {
        return invalid("both score samples must be non-empty");
    }
    if neg.iter().chain(pos).any(|v| !v.is_finite()) {
        return invalid("non-finite score");
    }
    Ok(())
}

/// Empirical ROC of positive scores against negative scores.
///
/// Thresholds sweep the distinct pooled values from the top; a group of
/// tied scores moves FPR and TPR together. Collinear breakpoints are
/// merged so only jump points remain.
pub fn empirical_roc(neg: &[f64], pos: &[f64]) -> Result<RocCurve> {
    check_nonempty(neg, pos)?;
    let (m, n) = (neg.len() as i64, pos.len() as i64);
    let mut pooled: Vec<(f64, bool)> = neg
        .iter()
        .map(|&v| (v, false))
        .chain(pos.iter().map(|&v| (v, true)))
        .collect();
    pooled.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut counts: Vec<(i64, i64)> = vec![(0, 0)];
    let (mut fp, mut tp) = (0i64, 0i64);
    let mut i = 0;
    while i < pooled.len() {
        let v = pooled[i].0;
        while i < pooled.len() && pooled[i].0 == v {
            if pooled[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let next = (fp, tp);
        if counts.len() >= 2 {
            let a = counts[counts.len() - 2];
            let b = counts[counts.len() - 1];
            // same direction in (fp/m, tp/n) coordinates
            if (b.0 - a.0) * (next.1 - b.1) == (b.1 - a.1) * (next.0 - b.0) {
                counts.pop();
            }
        }
        counts.push(next);
    }
    Ok(RocCurve {
        points: counts
            .into_iter()
            .map(|(f, t)| (f as f64 / m as f64, t as f64 / n as f64))
            .collect(),
    })
}

/// Concordance counts `(#{y < x}, #{y = x})` over all negative/positive pairs.
pub fn pair_counts(neg: &[f64], pos: &[f64]) -> Result<(u64, u64)> {
    check_nonempty(neg, pos)?;
    let mut sorted = neg.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let (mut below, mut ties) = (0u64, 0u64);
    for &x in pos {
        let lo = sorted.partition_point(|&y| y < x);
        let hi = sorted.partition_point(|&y| y <= x);
        below += lo as u64;
        ties += (hi - lo) as u64;
    }
    Ok((below, ties))
}

/// Rate of concordant pairs, ties counted one half.
pub fn auc_pairwise(neg: &[f64], pos: &[f64]) -> Result<f64> {
    let (below, ties) = pair_counts(neg, pos)?;
    let pairs = (neg.len() * pos.len()) as f64;
    Ok((below as f64 + 0.5 * ties as f64) / pairs)
}

/// Trapezoidal area under a piecewise-linear curve.
pub fn auc_from_curve(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Distance from the curve to the main diagonal.
pub fn roc_distance(curve: &RocCurve, metric: RocMetric) -> f64 {
    match metric {
        RocMetric::Sup => curve
            .points
            .iter()
            .map(|&(f, t)| (t - f).abs())
            .fold(0.0, f64::max),
        RocMetric::L1 => curve
            .points
            .windows(2)
            .map(|w| {
                let width = w[1].0 - w[0].0;
                if width <= 0.0 {
                    return 0.0;
                }
                let g0 = w[0].1 - w[0].0;
                let g1 = w[1].1 - w[1].0;
                if g0 * g1 >= 0.0 {
                    width * (g0.abs() + g1.abs()) / 2.0
                } else {
                    width * (g0 * g0 + g1 * g1) / (2.0 * (g0.abs() + g1.abs()))
                }
            })
            .sum(),
    }
}

/// Optimal ROC for two Gaussian populations sharing covariance `Γ` whose
/// means differ by `δ`.
#[derive(Debug, Clone)]
pub struct GaussianOracle {
    delta: DVector<f64>,
    gamma: DMatrix<f64>,
    /// `Γ⁻¹δ`, the direction of the optimal linear scorer.
    direction: DVector<f64>,
    /// `δᵀΓ⁻¹δ`.
    separation: f64,
}

impl GaussianOracle {
    pub fn new(delta: Vec<f64>, gamma: DMatrix<f64>) -> Result<Self> {
        let d = delta.len();
        if gamma.nrows() != d || gamma.ncols() != d {
            return invalid("covariance shape does not match the mean difference");
        }
        if (&gamma - gamma.transpose()).abs().max() > 1e-12 {
            return Err(Error::Model("covariance is not symmetric".into()));
        }
        let chol = gamma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Model("covariance is not positive definite".into()))?;
        let delta = DVector::from_vec(delta);
        let direction = chol.solve(&delta);
        let separation = delta.dot(&direction);
        Ok(GaussianOracle {
            delta,
            gamma,
            direction,
            separation,
        })
    }

    pub fn delta(&self) -> &[f64] {
        self.delta.as_slice()
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn direction(&self) -> &[f64] {
        self.direction.as_slice()
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// Binormal AUC `Φ(√(δᵀΓ⁻¹δ / 2))`.
    pub fn auc_star(&self) -> f64 {
        normal_cdf((self.separation / 2.0).sqrt())
    }
}

/// `ROC*(α) = 1 − Φ(Φ⁻¹(1−α) − √(δᵀΓ⁻¹δ))`.
pub fn gaussian_roc_star(oracle: &GaussianOracle, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0,1), got {alpha}"));
    }
    Ok(1.0 - normal_cdf(normal_quantile(1.0 - alpha) - oracle.separation.sqrt()))
}

impl RocFn for GaussianOracle {
    fn eval(&self, alpha: f64) -> f64 {
        if alpha <= 0.0 {
            return if self.separation > 0.0 {
                0.0
            } else {
                alpha.max(0.0)
            };
        }
        if alpha >= 1.0 {
            return 1.0;
        }
        gaussian_roc_star(self, alpha).expect("alpha checked")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empirical_examples() {
        let c = empirical_roc(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(
            c.points(),
            &[(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]
        );
        let c = empirical_roc(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(c.points(), &[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        let s = [0.3, 1.0, -2.0, 1.0];
        assert_eq!(empirical_roc(&s, &s).unwrap(), RocCurve::diagonal());
        assert!(empirical_roc(&[], &[1.0]).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_pairwise(&[1.0, 3.0], &[2.0, 4.0]).unwrap(), 0.75);
        assert_eq!(
            auc_pairwise(&[1.0, 5.0, 5.0], &[1.0, 5.0, 5.0]).unwrap(),
            0.5
        );
        assert_eq!(auc_pairwise(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(auc_from_curve(&RocCurve::diagonal()), 0.5);
        let c = empirical_roc(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(auc_from_curve(&c), 0.75);
        let corner = empirical_roc(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(auc_from_curve(&corner), 1.0);
    }

    #[test]
    fn distance_examples() {
        let d = RocCurve::diagonal();
        assert_eq!(roc_distance(&d, RocMetric::L1), 0.0);
        assert_eq!(roc_distance(&d, RocMetric::Sup), 0.0);
        let corner = empirical_roc(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(roc_distance(&corner, RocMetric::L1), 0.5);
        assert_eq!(roc_distance(&corner, RocMetric::Sup), 1.0);
        let c = empirical_roc(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(roc_distance(&c, RocMetric::L1), 0.25);
        // crossing curve: above then below the diagonal
        let x = RocCurve::new(vec![(0.0, 0.0), (0.0, 0.5), (1.0, 0.5), (1.0, 1.0)]).unwrap();
        assert!((roc_distance(&x, RocMetric::L1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn eval_interpolates_and_takes_upper_value_on_jumps() {
        let c = empirical_roc(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(c.eval(0.0), 0.5);
        assert_eq!(c.eval(0.25), 0.5);
        assert_eq!(c.eval(0.5), 1.0);
        assert_eq!(c.eval(0.75), 1.0);
        assert_eq!(RocCurve::diagonal().eval(0.3), 0.3);
        assert_eq!(c.breakpoints(), vec![0.5]);
    }

    #[test]
    fn csv_round_trip() {
        let c = empirical_roc(&[0.1, 0.7, 0.3], &[0.2, 0.9]).unwrap();
        assert_eq!(RocCurve::from_csv(&c.to_csv()).unwrap(), c);
        assert!(RocCurve::from_csv("fpr,tpr\n0,0\n0.5,0.2\n").is_err());
    }

    #[test]
    fn gaussian_examples() {
        let zero = GaussianOracle::new(vec![0.0, 0.0], DMatrix::identity(2, 2)).unwrap();
        for a in [0.1, 0.5, 0.9] {
            assert!((gaussian_roc_star(&zero, a).unwrap() - a).abs() < 1e-10);
        }
        assert!((zero.auc_star() - 0.5).abs() < 1e-15);
        let one = GaussianOracle::new(vec![1.0], DMatrix::identity(1, 1)).unwrap();
        let v = gaussian_roc_star(&one, 0.5).unwrap();
        assert!((v - 0.841_344_746_068_543).abs() < 1e-10);
        assert!(gaussian_roc_star(&one, 0.0).is_err());
        assert!(gaussian_roc_star(&one, 1.0).is_err());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GaussianOracle::new(vec![0.0, 1.0], bad),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn gaussian_roc_star_concave_above_diagonal() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let o = GaussianOracle::new(vec![0.4, -0.3], g).unwrap();
        let h = 1e-3;
        let vals: Vec<f64> = (1..1000)
            .map(|i| gaussian_roc_star(&o, i as f64 * h).unwrap())
            .collect();
        for (i, v) in vals.iter().enumerate() {
            assert!(*v >= (i + 1) as f64 * h);
        }
        for w in vals.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-12);
        }
    }

    fn distinct(v: Vec<i32>) -> Vec<f64> {
        let mut v = v;
        v.sort_unstable();
        v.dedup();
        v.into_iter().map(f64::from).collect()
    }

    proptest! {
        #[test]
        fn curve_auc_matches_pairwise(neg in prop::collection::vec(-20i32..20, 1..30),
                                      pos in prop::collection::vec(-20i32..20, 1..30)) {
            let neg: Vec<f64> = neg.into_iter().map(f64::from).collect();
            let pos: Vec<f64> = pos.into_iter().map(f64::from).collect();
            let c = empirical_roc(&neg, &pos).unwrap();
            prop_assert!((auc_from_curve(&c) - auc_pairwise(&neg, &pos).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn invariant_under_increasing_transform(neg in prop::collection::vec(-50i32..50, 1..25),
                                                 pos in prop::collection::vec(-50i32..50, 1..25)) {
            let neg: Vec<f64> = neg.into_iter().map(f64::from).collect();
            let pos: Vec<f64> = pos.into_iter().map(f64::from).collect();
            let t = |v: &Vec<f64>| -> Vec<f64> { v.iter().map(|x| (x / 7.0).exp() * 3.0 - 1.0).collect() };
            prop_assert_eq!(empirical_roc(&neg, &pos).unwrap(), empirical_roc(&t(&neg), &t(&pos)).unwrap());
            prop_assert_eq!(auc_pairwise(&neg, &pos).unwrap(), auc_pairwise(&t(&neg), &t(&pos)).unwrap());
        }

        #[test]
        fn swapping_reflects(neg in prop::collection::vec(-10i32..10, 1..20),
                             pos in prop::collection::vec(-10i32..10, 1..20)) {
            let neg: Vec<f64> = neg.into_iter().map(f64::from).collect();
            let pos: Vec<f64> = pos.into_iter().map(f64::from).collect();
            prop_assert_eq!(empirical_roc(&pos, &neg).unwrap(), empirical_roc(&neg, &pos).unwrap().reflect());
        }

        #[test]
        fn auc_via_cdf_difference(a in prop::collection::vec(-1000i32..1000, 1..30),
                                  b in prop::collection::vec(-1000i32..1000, 1..30)) {
            // tie-free: keep values distinct across and within samples
            let a = distinct(a);
            let b: Vec<f64> = distinct(b).into_iter().filter(|v| !a.contains(v)).collect();
            prop_assume!(!b.is_empty());
            // neg ~ H (empirical cdf Ĥ), pos ~ G (Ĝ); integrate Ĥ − Ĝ against dĜ
            let (neg, pos) = (&b, &a);
            let h = |t: f64| neg.iter().filter(|&&v| v <= t).count() as f64 / neg.len() as f64;
            // Ĝ at its own jump points takes the midpoint of the jump
            let g = |t: f64| {
                let below = pos.iter().filter(|&&v| v < t).count() as f64;
                let upto = pos.iter().filter(|&&v| v <= t).count() as f64;
                (below + upto) / (2.0 * pos.len() as f64)
            };
            let n = pos.len() as f64;
            let alt = 0.5 + pos.iter().map(|&x| h(x) - g(x)).sum::<f64>() / n;
            prop_assert!((alt - auc_pairwise(neg, pos).unwrap()).abs() < 1e-12);
        }
    }
}
