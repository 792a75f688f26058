use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A nondecreasing score-generating function on `[0, 1]`.
///
/// Text form (used by configs, file headers and the CLI): `mww`,
/// `rtb:<u0>`, `power:<q>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScoreGenerator {
    /// `u`, the rank-sum generator.
    Mww,
    /// `u * 1{u >= u0}`, weighting only the top ranks.
    Rtb { u0: f64 },
    /// `u^q`, `q > 1`.
    Power { q: f64 },
}

impl ScoreGenerator {
    pub fn rtb(u0: f64) -> Result<Self> {
        if !(u0 > 0.0 && u0 < 1.0) {
            return invalid(format!("rtb threshold must lie in (0,1), got {u0}"));
        }
        Ok(ScoreGenerator::Rtb { u0 })
    }

    pub fn power(q: f64) -> Result<Self> {
        if !(q > 1.0 && q.is_finite()) {
            return invalid(format!("power exponent must exceed 1, got {q}"));
        }
        Ok(ScoreGenerator::Power { q })
    }

    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            ScoreGenerator::Mww => u,
            ScoreGenerator::Rtb { u0 } => {
                if u >= u0 {
                    u
                } else {
                    0.0
                }
            }
            ScoreGenerator::Power { q } => u.powf(q),
        }
    }

    /// Derivative, for the smooth kinds.
    pub fn derivative(&self, u: f64) -> Option<f64> {
        match *self {
            ScoreGenerator::Mww => Some(1.0),
            ScoreGenerator::Rtb { .. } => None,
            ScoreGenerator::Power { q } => Some(q * u.powf(q - 1.0)),
        }
    }

    /// `∫₀¹ φ(u) du`.
    pub fn integral(&self) -> f64 {
        match *self {
            ScoreGenerator::Mww => 0.5,
            ScoreGenerator::Rtb { u0 } => (1.0 - u0 * u0) / 2.0,
            ScoreGenerator::Power { q } => 1.0 / (q + 1.0),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        1.0
    }

    /// `‖φ′‖∞`; `None` for the discontinuous RTB generator.
    pub fn deriv_sup_norm(&self) -> Option<f64> {
        match *self {
            ScoreGenerator::Mww => Some(1.0),
            ScoreGenerator::Rtb { .. } => None,
            ScoreGenerator::Power { q } => Some(q),
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.deriv_sup_norm().is_some()
    }

    /// Point of discontinuity in `(0, 1)`, if any.
    pub fn kink(&self) -> Option<f64> {
        match *self {
            ScoreGenerator::Rtb { u0 } => Some(u0),
            _ => None,
        }
    }

    /// Integer weights `w(r)` and a scale such that
    /// `φ(r / (N+1)) = w(r) / scale` for every rank `r` in `1..=N`.
    /// Lets rank-subset statistics be grouped exactly.
    pub(crate) fn integer_weights(&self, pooled: usize) -> Option<(Vec<u128>, f64)> {
        let denom = (pooled + 1) as f64;
        match *self {
            ScoreGenerator::Mww => Some(((1..=pooled as u128).collect(), denom)),
            ScoreGenerator::Rtb { u0 } => Some((
                (1..=pooled)
                    .map(|r| if r as f64 / denom >= u0 { r as u128 } else { 0 })
                    .collect(),
                denom,
            )),
            ScoreGenerator::Power { q } => {
                if q.fract() != 0.0 || q > 16.0 {
                    return None;
                }
                let q = q as u32;
                let top = (pooled as u128).checked_pow(q)?;
                // the sum over at most `pooled` ranks must not overflow
                top.checked_mul(pooled as u128)?;
                Some((
                    (1..=pooled as u128).map(|r| r.pow(q)).collect(),
                    denom.powi(q as i32),
                ))
            }
        }
    }

    pub fn descriptor(&self) -> String {
        match *self {
            ScoreGenerator::Mww => "mww".to_string(),
            ScoreGenerator::Rtb { u0 } => format!("rtb:{u0}"),
            ScoreGenerator::Power { q } => format!("power:{q}"),
        }
    }
}

impl fmt::Display for ScoreGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl FromStr for ScoreGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.to_string(), Some(a.to_string())),
            None => (s.clone(), None),
        };
        let num = |a: Option<String>| -> Result<f64> {
            a.ok_or_else(|| Error::Parse(format!("generator `{s}` needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("generator `{s}`: {e}")))
        };
        match kind.as_str() {
            "mww" if arg.is_none() => Ok(ScoreGenerator::Mww),
            "rtb" => ScoreGenerator::rtb(num(arg)?),
            "power" => ScoreGenerator::power(num(arg)?),
            _ => Err(Error::Parse(format!("unknown score generator `{s}`"))),
        }
    }
}

impl TryFrom<String> for ScoreGenerator {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ScoreGenerator> for String {
    fn from(g: ScoreGenerator) -> String {
        g.descriptor()
    }
}
