//! Row-major multivariate samples and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Which side of the two-sample problem a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model: String,
    pub role: Role,
    pub seed: u64,
}

/// An `n x d` matrix of finite observations, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    dim: usize,
    data: Vec<f64>,
    pub provenance: Option<Provenance>,
}

impl Sample {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("sample dimension must be positive");
        }
        if data.len() % dim != 0 {
            return invalid(format!(
                "{} values do not form rows of dimension {dim}",
                data.len()
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("sample contains a non-finite value");
        }
        Ok(Sample {
            dim,
            data,
            provenance: None,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return invalid("sample has no rows");
        };
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(dim * rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().len() != dim {
                return invalid(format!("row {i} has dimension {}", r.as_ref().len()));
            }
            data.extend_from_slice(r.as_ref());
        }
        Sample::new(dim, data)
    }

    /// One-dimensional sample from scalars.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Sample::new(1, values.to_vec())
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = Some(p);
        self
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New sample holding the rows at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Sample {
        let mut data = Vec::with_capacity(idx.len() * self.dim);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Sample {
            dim: self.dim,
            data,
            provenance: self.provenance.clone(),
        }
    }

    /// Column means.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for r in self.rows() {
            for (a, v) in m.iter_mut().zip(r) {
                *a += v;
            }
        }
        let n = self.len() as f64;
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    pub fn to_csv(&self, header: bool) -> String {
        let mut out = String::new();
        if header {
            let names: Vec<String> = (0..self.dim).map(|j| format!("x{j}")).collect();
            out.push_str(&names.join(","));
            out.push('\n');
        }
        for r in self.rows() {
            for (j, v) in r.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:?}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses CSV text; a first line that does not parse as numbers is
    /// treated as a header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            match parsed {
                Ok(r) => rows.push(r),
                Err(_) if rows.is_empty() && lineno == 0 => continue,
                Err(e) => return Err(Error::Parse(format!("line {}: {e}", lineno + 1))),
            }
        }
        Sample::from_rows(&rows)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Sample::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn write_csv(&self, path: &Path, header: bool) -> Result<()> {
        std::fs::write(path, self.to_csv(header))?;
        Ok(())
    }
}

/// Pools two samples of a common dimension (X rows first).
pub fn pool(x: &Sample, y: &Sample) -> Result<Sample> {
    if x.dim() != y.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
    }
    let mut data = x.as_slice().to_vec();
    data.extend_from_slice(y.as_slice());
    Sample::new(x.dim(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_and_without_header() {
        let s = Sample::from_rows(&[[0.1, -2.0], [1e-300, 3.5]]).unwrap();
        assert_eq!(Sample::from_csv(&s.to_csv(true)).unwrap(), s);
        assert_eq!(Sample::from_csv(&s.to_csv(false)).unwrap(), s);
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(Sample::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Sample::from_scalars(&[f64::NAN]).is_err());
        assert!(Sample::from_csv("a,b\n1,2\nx,3\n").is_err());
    }
}
