//! Quantized, window-truncated shift systems.
//!
//! A point is a word of symbol indices standing for the coordinates
//! `-W..=W` of a bi-infinite sequence. For orbit metrics of depth `N` the
//! words are extended to the right to cover `-W..W+N-1`, which is exactly the
//! set of coordinates `d(T^n x, T^n y)` reads for `n < N`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{invalid, precondition, Result};
use crate::metric::FiniteMetricSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Alphabet {
    /// Levels `{0, 1/(k-1), ..., 1}` under `|·|`.
    QuantizedInterval { levels: usize },
    /// Explicit reals in `[0,1]` under `|·|`.
    ExplicitSet { values: Vec<f64> },
    /// `(Z_q)^r` standing for the `q`-point grid of `T^r`, under the sup of
    /// circle distances.
    TorusQuantized { r: usize, q: usize },
}

impl Alphabet {
    pub fn validate(&self) -> Result<()> {
        match self {
            Alphabet::QuantizedInterval { levels } if *levels == 0 => invalid("levels must be >= 1"),
            Alphabet::ExplicitSet { values } => {
                if values.is_empty() {
                    return invalid("explicit alphabet is empty");
                }
                if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                    return invalid("explicit alphabet values must lie in [0,1]");
                }
                for (i, a) in values.iter().enumerate() {
                    if values[i + 1..].contains(a) {
                        return invalid(format!("explicit alphabet repeats value {a}"));
                    }
                }
                Ok(())
            }
            Alphabet::TorusQuantized { r, q } if *r == 0 || *q == 0 => invalid("r and q must be >= 1"),
            _ => Ok(()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Alphabet::QuantizedInterval { levels } => *levels,
            Alphabet::ExplicitSet { values } => values.len(),
            Alphabet::TorusQuantized { r, q } => q.pow(*r as u32),
        }
    }

    /// Real value of an interval/explicit symbol.
    pub fn value(&self, s: usize) -> f64 {
        match self {
            Alphabet::QuantizedInterval { levels } => {
                if *levels == 1 {
                    0.0
                } else {
                    s as f64 / (*levels - 1) as f64
                }
            }
            Alphabet::ExplicitSet { values } => values[s],
            Alphabet::TorusQuantized { q, .. } => (s % q) as f64 / *q as f64,
        }
    }

    /// Torus coordinates of a symbol, least significant first.
    pub fn torus_coords(&self, s: usize) -> Vec<usize> {
        match self {
            Alphabet::TorusQuantized { r, q } => {
                let mut v = Vec::with_capacity(*r);
                let mut s = s;
                for _ in 0..*r {
                    v.push(s % q);
                    s /= q;
                }
                v
            }
            _ => vec![s],
        }
    }

    pub fn torus_symbol(&self, coords: &[usize]) -> usize {
        match self {
            Alphabet::TorusQuantized { q, .. } => coords.iter().rev().fold(0, |acc, &c| acc * q + c),
            _ => coords[0],
        }
    }

    /// Point metric between symbols.
    pub fn rho(&self, a: usize, b: usize) -> f64 {
        match self {
            Alphabet::TorusQuantized { q, .. } => {
                let (ca, cb) = (self.torus_coords(a), self.torus_coords(b));
                ca.iter()
                    .zip(&cb)
                    .map(|(&x, &y)| circle(x, y, *q))
                    .fold(0.0, f64::max)
            }
            _ => (self.value(a) - self.value(b)).abs(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Alphabet::QuantizedInterval { levels } => if *levels > 1 { 1.0 } else { 0.0 },
            Alphabet::ExplicitSet { values } => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            }
            Alphabet::TorusQuantized { q, .. } => (q / 2) as f64 / *q as f64,
        }
    }

    /// Full symbol distance table.
    pub fn rho_table(&self) -> Vec<Vec<f64>> {
        let k = self.size();
        (0..k).map(|a| (0..k).map(|b| self.rho(a, b)).collect()).collect()
    }
}

/// Circle distance `min_n |t - t' - n|` between grid points `x/q`, `y/q`.
pub fn circle(x: usize, y: usize, q: usize) -> f64 {
    let d = x.abs_diff(y) % q;
    d.min(q - d) as f64 / q as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    Exhaustive,
    UniformSample { count: usize, seed: u64 },
}

/// Window constraint `M·(x_n, ..., x_{n+a-1}) ≡ 0` on torus coordinates,
/// imposed at every window position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub a: usize,
    #[serde(rename = "M")]
    pub m: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub alphabet: Alphabet,
    #[serde(rename = "W")]
    pub window: usize,
    pub policy: Policy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<Constraint>,
}

/// Weight `2^{-|t|}` of window offset `t`.
#[inline]
pub fn weight(t: i64) -> f64 {
    0.5f64.powi(t.unsigned_abs() as i32)
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        self.alphabet.validate()?;
        if let Some(c) = &self.constraint {
            let Alphabet::TorusQuantized { r, .. } = self.alphabet else {
                return invalid("constraints need a torus alphabet");
            };
            if c.a == 0 {
                return invalid("constraint window a must be >= 1");
            }
            if c.m.iter().any(|row| row.len() != r * c.a) {
                return invalid(format!("constraint rows must have r*a = {} entries", r * c.a));
            }
        }
        if let Policy::UniformSample { count, .. } = self.policy {
            if count == 0 {
                return invalid("sample count must be positive");
            }
        }
        Ok(())
    }

    pub fn base_len(&self) -> usize {
        2 * self.window + 1
    }

    /// Word length needed for orbit metrics of depth `n`.
    pub fn depth_len(&self, n: usize) -> usize {
        2 * self.window + n
    }

    pub fn truncation_error(&self) -> f64 {
        truncation_error(self.window, self.alphabet.diameter())
    }

    /// Shift-metric distance between the windows of `x` and `y` starting at
    /// word position `offset`.
    pub fn window_distance(&self, rho: &[Vec<f64>], x: &[u32], y: &[u32], offset: usize) -> f64 {
        let w = self.window as i64;
        let mut s = 0.0;
        for t in -w..=w {
            let i = (offset as i64 + w + t) as usize;
            s += weight(t) * rho[x[i] as usize][y[i] as usize];
        }
        s
    }

    /// Base metric `d` on words of length `2W+1`.
    pub fn distance(&self, x: &[u32], y: &[u32]) -> f64 {
        self.window_distance(&self.alphabet.rho_table(), x, y, 0)
    }

    /// Whether every window position of `word` satisfies the constraint.
    pub fn admissible(&self, word: &[u32]) -> bool {
        let Some(c) = &self.constraint else { return true };
        let Alphabet::TorusQuantized { r, q } = self.alphabet else { return true };
        if word.len() < c.a {
            return true;
        }
        let coords: Vec<Vec<usize>> = word.iter().map(|&s| self.alphabet.torus_coords(s as usize)).collect();
        for start in 0..=word.len() - c.a {
            for row in &c.m {
                let mut acc: i64 = 0;
                for j in 0..c.a {
                    for l in 0..r {
                        acc += row[j * r + l] * coords[start + j][l] as i64;
                    }
                }
                if acc.rem_euclid(q as i64) != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Point set of words with the given length under the system's policy.
    pub fn words(&self, len: usize, budget: &Budget) -> Result<Vec<Vec<u32>>> {
        self.validate()?;
        let k = self.alphabet.size();
        match &self.policy {
            Policy::Exhaustive => {
                if self.constraint.is_some() {
                    enumerate_admissible(self, len, budget)
                } else {
                    let total = (k as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
                    budget.check_enumeration("exhaustive word enumeration", total)?;
                    Ok(all_words(k, len))
                }
            }
            Policy::UniformSample { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                if self.constraint.is_some() {
                    let all = enumerate_admissible(self, len, budget)?;
                    let mut out: Vec<Vec<u32>> = (0..*count).map(|_| all[rng.gen_range(0..all.len())].clone()).collect();
                    out.sort();
                    out.dedup();
                    return Ok(out);
                }
                let mut out: Vec<Vec<u32>> = (0..*count)
                    .map(|_| (0..len).map(|_| rng.gen_range(0..k as u32)).collect())
                    .collect();
                out.sort();
                out.dedup();
                Ok(out)
            }
        }
    }

    /// Base points (words of length `2W+1`).
    pub fn points(&self, budget: &Budget) -> Result<Vec<Vec<u32>>> {
        self.words(self.base_len(), budget)
    }

    pub fn word_label(&self, w: &[u32]) -> String {
        w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(".")
    }
}

/// `Σ_{|n|>W} 2^{-|n|}·diam = 2^{1-W}·diam`.
pub fn truncation_error(window: usize, diam: f64) -> f64 {
    if diam == 0.0 {
        0.0
    } else {
        2.0f64.powi(1 - window as i32) * diam
    }
}

fn all_words(k: usize, len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * k);
        for w in &out {
            for s in 0..k as u32 {
                let mut v = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Depth-first enumeration pruned by the constraint at each completed window.
fn enumerate_admissible(sys: &SystemSpec, len: usize, budget: &Budget) -> Result<Vec<Vec<u32>>> {
    let k = sys.alphabet.size() as u32;
    let mut out = Vec::new();
    let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
    while let Some(w) = stack.pop() {
        if w.len() == len {
            out.push(w);
            budget.check_enumeration("admissible word enumeration", out.len() as u128)?;
            continue;
        }
        for s in (0..k).rev() {
            let mut v = w.clone();
            v.push(s);
            let tail = v.len().saturating_sub(sys.constraint.as_ref().map_or(1, |c| c.a));
            if sys.admissible(&v[tail..]) {
                stack.push(v);
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn build_full_shift(alphabet: Alphabet, window: usize, policy: Policy, budget: &Budget) -> Result<SystemSpec> {
    let sys = SystemSpec {
        alphabet,
        window,
        policy,
        transform: None,
        constraint: None,
    };
    sys.validate()?;
    if sys.policy == Policy::Exhaustive {
        let total = (sys.alphabet.size() as u128)
            .checked_pow(sys.base_len() as u32)
            .unwrap_or(u128::MAX);
        budget.check_enumeration("build_full_shift", total)?;
    }
    Ok(sys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Harmonic,
    Geometric,
}

pub fn harmonic_values(k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (1..=k).map(|n| 1.0 / n as f64).collect();
    v.push(0.0);
    v
}

pub fn geometric_values(k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..=k).map(|n| 0.5f64.powi(n as i32)).collect();
    v.push(0.0);
    v
}

/// The sequence-space example over `{1, 1/2, ..., 1/k, 0}` or its geometric
/// image `{1, 2^-1, ..., 2^-k, 0}`.
pub fn build_sequence_example(k: usize, variant: Variant, window: usize, policy: Policy) -> Result<SystemSpec> {
    if k < 2 {
        return invalid("k must be >= 2");
    }
    let (values, transform) = match variant {
        Variant::Harmonic => (harmonic_values(k), None),
        Variant::Geometric => (geometric_values(k), Some("f(1/n) = 2^-n".to_string())),
    };
    let sys = SystemSpec {
        alphabet: Alphabet::ExplicitSet { values },
        window,
        policy,
        transform,
        constraint: None,
    };
    sys.validate()?;
    Ok(sys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitKind {
    Max,
    Avg,
}

/// Orbit metric `d_N` (max) or `d̄_N` (average) over the system's words of
/// length `2W+N`, together with the words themselves.
pub fn orbit_metric(
    sys: &SystemSpec,
    n: usize,
    kind: OrbitKind,
    budget: &Budget,
) -> Result<(FiniteMetricSpace, Vec<Vec<u32>>)> {
    if n == 0 {
        return precondition("orbit depth N must be >= 1");
    }
    let words = sys.words(sys.depth_len(n), budget)?;
    let space = orbit_metric_on(sys, &words, n, kind);
    Ok((space, words))
}

/// Orbit metric on a supplied word list (each of length at least `2W+N`).
pub fn orbit_metric_on(sys: &SystemSpec, words: &[Vec<u32>], n: usize, kind: OrbitKind) -> FiniteMetricSpace {
    let rho = sys.alphabet.rho_table();
    let m = words.len();
    let mut dist = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let mut acc = 0.0f64;
            for off in 0..n {
                let d = sys.window_distance(&rho, &words[i], &words[j], off);
                acc = match kind {
                    OrbitKind::Max => acc.max(d),
                    OrbitKind::Avg => acc + d,
                };
            }
            if kind == OrbitKind::Avg {
                acc /= n as f64;
            }
            dist[i][j] = acc;
            dist[j][i] = acc;
        }
    }
    FiniteMetricSpace {
        label: format!("W={} N={} {:?}", sys.window, n, kind),
        points: words.iter().map(|w| sys.word_label(w)).collect(),
        dist,
    }
}

/// Left shift by `j` with the first symbol filling the vacated right end.
pub fn shift_word(w: &[u32], j: usize) -> Vec<u32> {
    let mut v: Vec<u32> = w.iter().skip(j).copied().collect();
    v.resize(w.len(), 0);
    v
}
