//! Null distributions of centered linear rank statistics.
//!
//! Under the null hypothesis the ranks of the positive sample form a
//! uniformly random `n`-subset of `1..=N`, so the law of
//! `Σ φ(rank / (N+1)) / n − ∫φ` depends only on `(n, m, φ)`. Tables are
//! built either by enumerating every subset or from seeded random subsets.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::ScoreGenerator;
use crate::error::{invalid, Error, Result};
use crate::numeric::binomial;
use crate::rng;

/// Default ceiling on `C(N, n)` for exact enumeration.
pub const DEFAULT_EXACT_BUDGET: u128 = 2_000_000;
/// Draw count used when the exact budget is exceeded.
pub const DEFAULT_MC_DRAWS: u64 = 200_000;

/// Absolute tolerance used when comparing an observed centered statistic
/// against tabulated support points. Both are sums of `n` terms bounded by
/// one, so rounding differences stay far below the support spacing.
pub fn stat_tolerance(n: usize) -> f64 {
    64.0 * (n.max(1) as f64) * f64::EPSILON
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableMethod {
    Exact,
    MonteCarlo { draws: u64, seed: u64 },
}

impl TableMethod {
    pub fn descriptor(&self) -> String {
        match self {
            TableMethod::Exact => "exact".into(),
            TableMethod::MonteCarlo { draws, seed } => format!("montecarlo-{draws}-{seed}"),
        }
    }
}

/// How a caller wants its null table built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuantileMethod {
    Exact,
    MonteCarlo {
        draws: u64,
        seed: u64,
    },
    /// Exact when `C(N, n) <= budget`, otherwise Monte Carlo.
    Auto {
        budget: u64,
        draws: u64,
        seed: u64,
    },
}

impl Default for QuantileMethod {
    fn default() -> Self {
        QuantileMethod::Auto {
            budget: DEFAULT_EXACT_BUDGET as u64,
            draws: DEFAULT_MC_DRAWS,
            seed: 0,
        }
    }
}

impl QuantileMethod {
    /// Resolves to a concrete method for sizes `(n, m)`.
    pub fn resolve(&self, n: usize, m: usize) -> TableMethod {
        match *self {
            QuantileMethod::Exact => TableMethod::Exact,
            QuantileMethod::MonteCarlo { draws, seed } => TableMethod::MonteCarlo { draws, seed },
            QuantileMethod::Auto {
                budget,
                draws,
                seed,
            } => {
                if binomial((n + m) as u64, n as u64) <= u128::from(budget) {
                    TableMethod::Exact
                } else {
                    TableMethod::MonteCarlo { draws, seed }
                }
            }
        }
    }

    pub fn budget(&self) -> u128 {
        match *self {
            QuantileMethod::Auto { budget, .. } => u128::from(budget),
            _ => DEFAULT_EXACT_BUDGET,
        }
    }
}

/// Distribution of the centered statistic `Ŵ^φ_{n,m}/n − ∫φ` under the null.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTable {
    pub n: usize,
    pub m: usize,
    pub generator: ScoreGenerator,
    pub method: TableMethod,
    /// `(value, probability)`, values strictly increasing.
    pub support: Vec<(f64, f64)>,
}

/// Builds the null table for `(n, m, φ)`.
pub fn null_distribution(
    n: usize,
    m: usize,
    generator: ScoreGenerator,
    method: TableMethod,
    budget: u128,
) -> Result<NullTable> {
    match method {
        TableMethod::Exact => NullTable::exact(n, m, generator, budget),
        TableMethod::MonteCarlo { draws, seed } => {
            NullTable::monte_carlo(n, m, generator, draws, seed)
        }
    }
}

/// Accumulates subset statistics, exactly when φ has integer weights.
enum Accumulator {
    Integer {
        weights: Vec<u128>,
        scale: f64,
        counts: HashMap<u128, u64>,
    },
    Float {
        values: Vec<f64>,
        seen: Vec<f64>,
    },
}

impl Accumulator {
    fn new(generator: &ScoreGenerator, pooled: usize) -> Self {
        match generator.integer_weights(pooled) {
            Some((weights, scale)) => Accumulator::Integer {
                weights,
                scale,
                counts: HashMap::new(),
            },
            None => {
                let denom = (pooled + 1) as f64;
                Accumulator::Float {
                    values: (1..=pooled)
                        .map(|r| generator.eval(r as f64 / denom))
                        .collect(),
                    seen: Vec::new(),
                }
            }
        }
    }

    /// Records the subset given by zero-based rank indices.
    fn push(&mut self, subset: &[usize]) {
        match self {
            Accumulator::Integer {
                weights, counts, ..
            } => {
                let key: u128 = subset.iter().map(|&i| weights[i]).sum();
                *counts.entry(key).or_insert(0) += 1;
            }
            Accumulator::Float { values, seen } => {
                let mut idx = subset.to_vec();
                idx.sort_unstable();
                seen.push(idx.iter().map(|&i| values[i]).sum());
            }
        }
    }

    fn finish(self, n: usize, integral: f64) -> Vec<(f64, f64)> {
        let nf = n as f64;
        match self {
            Accumulator::Integer { scale, counts, .. } => {
                let total: u64 = counts.values().sum();
                let mut keys: Vec<(u128, u64)> = counts.into_iter().collect();
                keys.sort_unstable();
                keys.into_iter()
                    .map(|(k, c)| (k as f64 / scale / nf - integral, c as f64 / total as f64))
                    .collect()
            }
            Accumulator::Float { mut seen, .. } => {
                let total = seen.len() as f64;
                seen.sort_by(|a, b| a.total_cmp(b));
                let tol = stat_tolerance(n) * nf;
                let mut out: Vec<(f64, u64)> = Vec::new();
                for s in seen {
                    match out.last_mut() {
                        Some((v, c)) if (s - *v).abs() <= tol => *c += 1,
                        _ => out.push((s, 1)),
                    }
                }
                out.into_iter()
                    .map(|(s, c)| (s / nf - integral, c as f64 / total))
                    .collect()
            }
        }
    }
}

fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return invalid(format!("sample sizes must be positive, got n={n}, m={m}"));
    }
    Ok(())
}

impl NullTable {
    /// Enumerates all `C(n+m, n)` rank subsets with equal probability.
    pub fn exact(n: usize, m: usize, generator: ScoreGenerator, budget: u128) -> Result<Self> {
        check_sizes(n, m)?;
        let pooled = n + m;
        let needed = binomial(pooled as u64, n as u64);
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let mut acc = Accumulator::new(&generator, pooled);
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            acc.push(&idx);
            // advance to the next combination in lexicographic order
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(NullTable {
                        n,
                        m,
                        generator,
                        method: TableMethod::Exact,
                        support: acc.finish(n, generator.integral()),
                    });
                }
                i -= 1;
                if idx[i] < pooled - n + i {
                    break;
                }
            }
            idx[i] += 1;
            for j in i + 1..n {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    /// Tabulates `draws` uniformly random rank subsets from a seeded stream.
    pub fn monte_carlo(
        n: usize,
        m: usize,
        generator: ScoreGenerator,
        draws: u64,
        seed: u64,
    ) -> Result<Self> {
        check_sizes(n, m)?;
        if draws == 0 {
            return invalid("monte carlo table needs at least one draw");
        }
        let pooled = n + m;
        let mut acc = Accumulator::new(&generator, pooled);
        let mut rng = rng::stream(seed);
        let mut perm: Vec<usize> = (0..pooled).collect();
        for _ in 0..draws {
            for i in 0..n {
                let j = rng.random_range(i..pooled);
                perm.swap(i, j);
            }
            acc.push(&perm[..n]);
        }
        Ok(NullTable {
            n,
            m,
            generator,
            method: TableMethod::MonteCarlo { draws, seed },
            support: acc.finish(n, generator.integral()),
        })
    }

    /// `P{centered ≤ t}`.
    pub fn cdf(&self, t: f64) -> f64 {
        let tol = stat_tolerance(self.n);
        self.support
            .iter()
            .take_while(|(v, _)| *v <= t + tol)
            .map(|(_, p)| p)
            .fold(0.0, |acc, p| acc + p)
            .min(1.0)
    }

    pub fn max_point_mass(&self) -> f64 {
        self.support.iter().map(|(_, p)| *p).fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().map(|(v, p)| v * p).sum()
    }

    /// Smallest `t ≥ 0` with `P{centered ≤ t} ≥ 1 − α`.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        null_quantile(self, alpha)
    }

    /// `P{centered ≥ observed}`.
    pub fn p_value(&self, observed: f64) -> f64 {
        p_value(self, observed)
    }

    /// `P{centered ≤ observed}`, the lower-tail counterpart of [`p_value`].
    pub fn lower_p_value(&self, observed: f64) -> f64 {
        self.cdf(observed)
    }

    /// Total-variation distance to another table over the union of supports.
    pub fn total_variation(&self, other: &NullTable) -> f64 {
        let tol = stat_tolerance(self.n.max(other.n));
        let (a, b) = (&self.support, &other.support);
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0 - tol) {
                sum += a[i].1;
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 - tol {
                sum += b[j].1;
                j += 1;
            } else {
                sum += (a[i].1 - b[j].1).abs();
                i += 1;
                j += 1;
            }
        }
        0.5 * sum
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# ranktest null table v1\n");
        let _ = writeln!(out, "n {}", self.n);
        let _ = writeln!(out, "m {}", self.m);
        let _ = writeln!(out, "phi {}", self.generator);
        match self.method {
            TableMethod::Exact => out.push_str("method exact\n"),
            TableMethod::MonteCarlo { draws, seed } => {
                let _ = writeln!(out, "method montecarlo draws {draws} seed {seed}");
            }
        }
        let _ = writeln!(out, "support {}", self.support.len());
        for (v, p) in &self.support {
            let _ = writeln!(out, "{v:?} {p:?}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("null table: {what}"));
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let mut field = |name: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| bad(&format!("missing `{name}`")))?;
            line.strip_prefix(name)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| bad(&format!("expected `{name}`, found `{line}`")))
        };
        let parse_usize = |s: String| s.parse::<usize>().map_err(|e| bad(&e.to_string()));
        let n = parse_usize(field("n")?)?;
        let m = parse_usize(field("m")?)?;
        let generator: ScoreGenerator = field("phi")?.parse()?;
        let method_line = field("method")?;
        let toks: Vec<&str> = method_line.split_whitespace().collect();
        let method = match toks.as_slice() {
            ["exact"] => TableMethod::Exact,
            ["montecarlo", "draws", d, "seed", s] => TableMethod::MonteCarlo {
                draws: d.parse().map_err(|_| bad("draws"))?,
                seed: s.parse().map_err(|_| bad("seed"))?,
            },
            _ => return Err(bad(&format!("unknown method `{method_line}`"))),
        };
        let len = parse_usize(field("support")?)?;
        let mut support = Vec::with_capacity(len);
        for _ in 0..len {
            let line = lines.next().ok_or_else(|| bad("truncated support"))?;
            let (v, p) = line.split_once(' ').ok_or_else(|| bad("support row"))?;
            let v: f64 = v.parse().map_err(|_| bad("support value"))?;
            let p: f64 = p.parse().map_err(|_| bad("support probability"))?;
            support.push((v, p));
        }
        Ok(NullTable {
            n,
            m,
            generator,
            method,
            support,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        NullTable::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Smallest `t ≥ 0` with `P{centered ≤ t} ≥ 1 − α` under `table`.
pub fn null_quantile(table: &NullTable, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0,1), got {alpha}"));
    }
    let target = 1.0 - alpha - 1e-12;
    let mut cum = 0.0;
    for &(v, p) in &table.support {
        cum += p;
        if cum >= target {
            return Ok(v.max(0.0));
        }
    }
    Ok(table.support.last().map_or(0.0, |(v, _)| v.max(0.0)))
}

/// One-sided upper-tail p-value `P{centered ≥ observed}`.
pub fn p_value(table: &NullTable, observed: f64) -> f64 {
    let tol = stat_tolerance(table.n);
    table
        .support
        .iter()
        .filter(|(v, _)| *v >= observed - tol)
        .map(|(_, p)| p)
        .fold(0.0, |acc, p| acc + p)
        .min(1.0)
}

/// Thread-safe memo of null tables, optionally persisted to a directory so
/// repeated runs reuse earlier tabulations.
#[derive(Debug, Default)]
pub struct NullTableCache {
    dir: Option<PathBuf>,
    tables: RwLock<HashMap<String, Arc<NullTable>>>,
}

impl NullTableCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn persistent(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(NullTableCache {
            dir: Some(dir),
            tables: RwLock::default(),
        })
    }

    fn key(n: usize, m: usize, g: &ScoreGenerator, method: &TableMethod) -> String {
        format!(
            "n{n}_m{m}_{}_{}",
            g.descriptor().replace(':', "-"),
            method.descriptor()
        )
    }

    pub fn get(
        &self,
        n: usize,
        m: usize,
        generator: ScoreGenerator,
        method: QuantileMethod,
    ) -> Result<Arc<NullTable>> {
        let resolved = method.resolve(n, m);
        let key = Self::key(n, m, &generator, &resolved);
        if let Some(t) = self.tables.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(t));
        }
        let file = self.dir.as_ref().map(|d| d.join(format!("{key}.table")));
        let loaded = match &file {
            Some(f) if f.exists() => NullTable::load(f).ok().filter(|t| {
                t.n == n && t.m == m && t.generator == generator && t.method == resolved
            }),
            _ => None,
        };
        let table = match loaded {
            Some(t) => t,
            None => {
                let t = null_distribution(n, m, generator, resolved, method.budget())?;
                if let Some(f) = &file {
                    t.save(f)?;
                }
                t
            }
        };
        let mut guard = self.tables.write().expect("cache lock");
        Ok(Arc::clone(
            guard.entry(key).or_insert_with(|| Arc::new(table)),
        ))
    }

    pub fn len(&self) -> usize {
        self.tables.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
