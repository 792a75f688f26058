use crate::error::{invalid, Result};
use crate::numeric::{euclidean, sq_euclidean};
use crate::sample::{pool, Sample};

fn check_pair(x: &Sample, y: &Sample, min: usize) -> Result<()> {
    if x.len() < min || y.len() < min {
        return invalid(format!("each sample needs at least {min} points"));
    }
    if x.dim() != y.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
    }
    Ok(())
}

/// Symmetric `N × N` matrix of a function of pooled point pairs.
#[derive(Debug, Clone)]
pub struct PairMatrix {
    n: usize,
    values: Vec<f64>,
    /// Sum over ordered pairs `i ≠ j`.
    off_diagonal_total: f64,
}

impl PairMatrix {
    pub fn build(pooled: &Sample, f: impl Fn(&[f64], &[f64]) -> f64) -> Self {
        let n = pooled.len();
        let mut values = vec![0.0; n * n];
        let mut total = 0.0;
        for i in 0..n {
            values[i * n + i] = f(pooled.row(i), pooled.row(i));
            for j in i + 1..n {
                let v = f(pooled.row(i), pooled.row(j));
                values[i * n + j] = v;
                values[j * n + i] = v;
                total += 2.0 * v;
            }
        }
        PairMatrix {
            n,
            values,
            off_diagonal_total: total,
        }
    }

    /// Entrywise image under `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let mut total = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                total += 2.0 * values[i * self.n + j];
            }
        }
        PairMatrix {
            n: self.n,
            values,
            off_diagonal_total: total,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Sum over ordered pairs of distinct members of `idx`.
    pub fn within(&self, idx: &[usize]) -> f64 {
        let mut s = 0.0;
        for (a, &i) in idx.iter().enumerate() {
            let row = &self.values[i * self.n..(i + 1) * self.n];
            for &j in &idx[a + 1..] {
                s += row[j];
            }
        }
        2.0 * s
    }

    /// `(within a, within b, cross)` where `a` and `b` partition the pool.
    pub fn partition_sums(&self, a: &[usize], b: &[usize]) -> (f64, f64, f64) {
        let (sa, sb) = (self.within(a), self.within(b));
        (sa, sb, (self.off_diagonal_total - sa - sb) / 2.0)
    }

    /// Median over unordered pairs `i < j`.
    pub fn median_off_diagonal(&self) -> f64 {
        let mut v: Vec<f64> = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        if v.is_empty() {
            return 0.0;
        }
        let mid = v.len() / 2;
        v.select_nth_unstable_by(mid, f64::total_cmp);
        let hi = v[mid];
        if v.len() % 2 == 1 {
            return hi;
        }
        let lo = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo + hi) / 2.0
    }
}

pub(crate) fn gaussian_kernel(bandwidth: f64) -> impl Fn(&[f64], &[f64]) -> f64 {
    let c = 1.0 / (2.0 * bandwidth * bandwidth);
    move |a, b| (-sq_euclidean(a, b) * c).exp()
}

pub(crate) fn mmd_from_matrix(k: &PairMatrix, a: &[usize], b: &[usize]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (sxx, syy, sxy) = k.partition_sums(a, b);
    sxx / (n * (n - 1.0)) + syy / (m * (m - 1.0)) - 2.0 * sxy / (n * m)
}

pub(crate) fn energy_from_matrix(d: &PairMatrix, a: &[usize], b: &[usize]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (sxx, syy, sxy) = d.partition_sums(a, b);
    let wx = if n > 1.0 { sxx / (n * (n - 1.0)) } else { 0.0 };
    let wy = if m > 1.0 { syy / (m * (m - 1.0)) } else { 0.0 };
    2.0 * sxy / (n * m) - wx - wy
}

/// Unbiased squared MMD with the Gaussian kernel
/// `k(a,b) = exp(−‖a−b‖²/(2σ²))`.
pub fn mmd_unbiased(x: &Sample, y: &Sample, bandwidth: f64) -> Result<f64> {
    check_pair(x, y, 2)?;
    if !(bandwidth > 0.0) {
        return invalid("bandwidth must be positive");
    }
    let pooled = pool(x, y)?;
    let k = PairMatrix::build(&pooled, gaussian_kernel(bandwidth));
    let idx: Vec<usize> = (0..pooled.len()).collect();
    Ok(mmd_from_matrix(&k, &idx[..x.len()], &idx[x.len()..]))
}

/// Median pairwise Euclidean distance of the pooled sample.
pub fn median_heuristic(x: &Sample, y: &Sample) -> Result<f64> {
    let pooled = pool(x, y)?;
    let d = PairMatrix::build(&pooled, euclidean);
    Ok(d.median_off_diagonal())
}

/// Energy statistic `2·E‖X−Y‖ − E‖X−X'‖ − E‖Y−Y'‖` with within-sample
/// means over distinct pairs.
pub fn energy_statistic(x: &Sample, y: &Sample) -> Result<f64> {
    check_pair(x, y, 1)?;
    let pooled = pool(x, y)?;
    let d = PairMatrix::build(&pooled, euclidean);
    let idx: Vec<usize> = (0..pooled.len()).collect();
    Ok(energy_from_matrix(&d, &idx[..x.len()], &idx[x.len()..]))
}

/// Euclidean minimum spanning tree of a pooled sample, built with Prim's
/// algorithm on the dense distance matrix. Ties go to the lowest index.
pub fn minimum_spanning_tree(d: &PairMatrix) -> Vec<(usize, usize)> {
    let n = d.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let w = d.get(cur, v);
            if w < best[v] {
                best[v] = w;
                parent[v] = cur;
            }
            if next == usize::MAX || best[v] < best[next] {
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next));
        cur = next;
    }
    edges
}

/// Edges of `tree` joining the two sides of a labeling.
pub fn cross_edges(tree: &[(usize, usize)], is_x: &[bool]) -> usize {
    tree.iter().filter(|(a, b)| is_x[*a] != is_x[*b]).count()
}

/// Friedman–Rafsky count of minimum-spanning-tree edges joining the two
/// samples.
pub fn fr_statistic(x: &Sample, y: &Sample) -> Result<usize> {
    if x.len() + y.len() < 2 {
        return invalid("the pooled sample needs at least two points");
    }
    if x.dim() != y.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", x.dim(), y.dim()));
    }
    let pooled = pool(x, y)?;
    let tree = minimum_spanning_tree(&PairMatrix::build(&pooled, euclidean));
    let is_x: Vec<bool> = (0..pooled.len()).map(|i| i < x.len()).collect();
    Ok(cross_edges(&tree, &is_x))
}
