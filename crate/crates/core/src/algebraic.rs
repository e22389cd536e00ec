//! Algebraic actions: shift-invariant subgroups of `(T^r)^Z` cut out by an
//! integer window constraint, their projective dimension, the quantized Haar
//! measure, and the comparison of rate-distortion slopes with `prodim`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{invalid, precondition, Error, Result};
use crate::estimate::{fit_slope, DimensionEstimate, Weighting};
use crate::experiments::{rd_profile_from, CoveringSample, RdProfile};
use crate::measure::{MeasureOnSystem, Provenance};
use crate::metric::{covering_number, separating_number, FiniteMetricSpace, Mode};
use crate::ratedist::{dynamical_rd, shift_block_weights, AdditiveSource, Letter, RdCurve, RdPoint};
use crate::shift_cover::{box_cover_bounds, shift_kernel, Letter as BoxLetter};
use crate::systems::{circle, orbit_metric, Alphabet, Constraint, OrbitKind, Policy, SystemSpec};

/// Allowed excess when checking `prodim ≤ rdim slope ≤ covering slope`.
pub const SLOPE_TOL: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicActionSpec {
    pub r: usize,
    pub a: usize,
    #[serde(rename = "M")]
    pub m: Vec<Vec<i64>>,
    pub q: usize,
    #[serde(rename = "W")]
    pub window: usize,
}

impl AlgebraicActionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.a == 0 || self.q == 0 {
            return invalid("r, a and q must be >= 1");
        }
        if let Some(row) = self.m.iter().find(|row| row.len() != self.r * self.a) {
            return invalid(format!("constraint row has {} entries, expected r*a = {}", row.len(), self.r * self.a));
        }
        Ok(())
    }

    pub fn system(&self) -> SystemSpec {
        SystemSpec {
            alphabet: Alphabet::TorusQuantized { r: self.r, q: self.q },
            window: self.window,
            policy: Policy::Exhaustive,
            transform: None,
            constraint: (!self.m.is_empty()).then(|| Constraint { a: self.a, m: self.m.clone() }),
        }
    }

    /// The `(len−a+1)`-fold shifted stack of `M`, acting on `(T^r)^len`.
    pub fn stacked(&self, len: usize) -> Vec<Vec<i64>> {
        let cols = self.r * len;
        let mut out = Vec::new();
        if len < self.a {
            return out;
        }
        for start in 0..=len - self.a {
            for row in &self.m {
                let mut v = vec![0; cols];
                v[start * self.r..start * self.r + row.len()].copy_from_slice(row);
                out.push(v);
            }
        }
        out
    }
}

/// Full shift on `T^1`.
pub fn full_shift_spec(q: usize, window: usize) -> AlgebraicActionSpec {
    AlgebraicActionSpec { r: 1, a: 1, m: vec![], q, window }
}

/// `x_n^{(2)} = x_{n+1}^{(1)}` on `(T^2)^Z`.
pub fn linked_spec(q: usize, window: usize) -> AlgebraicActionSpec {
    AlgebraicActionSpec { r: 2, a: 2, m: vec![vec![0, 1, -1, 0]], q, window }
}

/// Fraction-free elimination in `i128`; `None` on overflow.
fn rank_bareiss(m: &[Vec<i64>]) -> Option<usize> {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev: i128 = 1;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, p);
        let piv = a[rank][col];
        for i in rank + 1..rows {
            let f = a[i][col];
            for j in col + 1..cols {
                let num = a[i][j].checked_mul(piv)?.checked_sub(f.checked_mul(a[rank][j])?)?;
                if num % prev != 0 {
                    return None;
                }
                a[i][j] = num / prev;
            }
            a[i][col] = 0;
        }
        prev = piv;
        rank += 1;
        if rank == rows {
            break;
        }
    }
    Some(rank)
}

fn rank_rational(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigRational>> =
        m.iter().map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(rank, p);
        for i in rank + 1..rows {
            if a[i][col].is_zero() {
                continue;
            }
            let f = &a[i][col] / &a[rank][col];
            for j in col..cols {
                let t = &f * &a[rank][j];
                a[i][j] -= t;
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over the rationals.
pub fn rank(m: &[Vec<i64>]) -> usize {
    rank_bareiss(m).unwrap_or_else(|| rank_rational(m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProdimSample {
    #[serde(rename = "N")]
    pub n: usize,
    pub rank: usize,
    /// `dim π_N(X) = rN − rank`.
    pub dim: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProdimReport {
    pub samples: Vec<ProdimSample>,
    /// `min_N dim π_N / N` over the supplied `N`.
    pub limit: f64,
    /// Eventual increment `dim π_{N+1} − dim π_N`, the exact limit of
    /// `dim π_N / N`, when it is constant over the probed range.
    pub exact_limit: Option<usize>,
}

impl ProdimReport {
    /// The exact limit when known, else the inf over the supplied `N`.
    pub fn value(&self) -> f64 {
        self.exact_limit.map_or(self.limit, |v| v as f64)
    }
}

pub fn projection_dim(spec: &AlgebraicActionSpec, n: usize) -> Result<ProdimSample> {
    spec.validate()?;
    if n < spec.a {
        return precondition(format!("N = {n} is below the constraint window a = {}", spec.a));
    }
    let rk = rank(&spec.stacked(n));
    let dim = spec.r * n - rk;
    Ok(ProdimSample { n, rank: rk, dim, ratio: dim as f64 / n as f64 })
}

pub fn prodim(spec: &AlgebraicActionSpec, ns: &[usize]) -> Result<ProdimReport> {
    if ns.is_empty() {
        return invalid("empty N list");
    }
    let samples = ns.iter().map(|&n| projection_dim(spec, n)).collect::<Result<Vec<_>>>()?;
    let limit = samples.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    // dim π_N is eventually affine in N; probe well past the constraint width.
    let start = ns.iter().copied().max().unwrap_or(0).max(4 * (spec.a + spec.r));
    let dims = (start..start + 6).map(|n| projection_dim(spec, n).map(|s| s.dim)).collect::<Result<Vec<_>>>()?;
    let steps: Vec<usize> = dims.windows(2).map(|w| w[1] - w[0]).collect();
    let exact_limit = steps.iter().all(|&d| d == steps[0]).then_some(steps[0]);
    Ok(ProdimReport { samples, limit, exact_limit })
}

/// Nonzero Smith-normal-form diagonal of an integer matrix.
pub fn elementary_divisors(m: &[Vec<i64>]) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    for t in 0..rows.min(cols) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            // Bring the smallest nonzero entry of row t / column t to the corner.
            let mut pos = (t, t);
            for i in t + 1..rows {
                if !a[i][t].is_zero() && a[i][t].abs() < a[pos.0][pos.1].abs() {
                    pos = (i, t);
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() && a[t][j].abs() < a[pos.0][pos.1].abs() {
                    pos = (t, j);
                }
            }
            if pos.0 != t {
                a.swap(t, pos.0);
            } else if pos.1 != t {
                for row in a.iter_mut() {
                    row.swap(t, pos.1);
                }
            }
            let p = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..rows {
                let f = &a[i][t] / &p;
                if !f.is_zero() {
                    for j in t..cols {
                        let v = &f * &a[t][j];
                        a[i][j] -= v;
                    }
                }
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..cols {
                let f = &a[t][j] / &p;
                if !f.is_zero() {
                    for row in a.iter_mut().skip(t) {
                        let v = &f * &row[t];
                        row[j] -= v;
                    }
                }
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &p).is_zero()));
            match bad {
                Some(i) => {
                    for j in t..cols {
                        let v = a[i][j].clone();
                        a[t][j] += v;
                    }
                }
                None => break,
            }
        }
        out.push(a[t][t].abs());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizationReport {
    pub len: usize,
    pub divisors: Vec<u64>,
    pub rank: usize,
    /// `r·len − rank`.
    pub free: usize,
    /// `Π gcd(d_i, q)`: the quantized solution count is `q^free · torsion`.
    pub torsion: u64,
    /// `Π d_i`, the number of components of the real solution group.
    pub components: u64,
}

impl QuantizationReport {
    pub fn solutions(&self, q: usize) -> Option<u128> {
        (q as u128).checked_pow(self.free as u32)?.checked_mul(self.torsion as u128)
    }
}

/// Counts `M·v ≡ 0 (mod q)` on words of length `len` and refuses `q` when some
/// component of the real solution group holds no quantized point.
pub fn quantization_check(spec: &AlgebraicActionSpec, len: usize) -> Result<QuantizationReport> {
    spec.validate()?;
    let stack = spec.stacked(len);
    let divisors = elementary_divisors(&stack)
        .into_iter()
        .map(|d| d.to_u64().ok_or_else(|| Error::Invalid(format!("elementary divisor {d} too large"))))
        .collect::<Result<Vec<u64>>>()?;
    let q = spec.q as u64;
    let torsion = divisors.iter().map(|d| d.gcd(&q)).product::<u64>();
    let components = divisors.iter().product::<u64>();
    if torsion != components {
        let l = divisors.iter().fold(q, |acc, d| acc.lcm(d));
        return precondition(format!(
            "q = {q} does not sample every component of the solution group (elementary divisors {divisors:?}); use a multiple of {l}, e.g. q = {l}"
        ));
    }
    Ok(QuantizationReport { len, rank: divisors.len(), free: spec.r * len - divisors.len(), divisors, torsion, components })
}

/// Uniform measure on the quantized solution group over words of length `len`.
pub fn haar_measure_len(spec: &AlgebraicActionSpec, len: usize, budget: &Budget) -> Result<MeasureOnSystem> {
    let rep = quantization_check(spec, len)?;
    let expected = rep.solutions(spec.q).unwrap_or(u128::MAX);
    budget.check_enumeration("quantized solution group", expected)?;
    let words = spec.system().words(len, budget)?;
    if words.len() as u128 != expected {
        return Err(Error::Numeric(format!(
            "enumerated {} solutions, Smith normal form predicts {expected}",
            words.len()
        )));
    }
    Ok(MeasureOnSystem::uniform(words, Provenance::Haar))
}

/// Haar measure on base words (length `2W+1`).
pub fn haar_measure(spec: &AlgebraicActionSpec, budget: &Budget) -> Result<MeasureOnSystem> {
    haar_measure_len(spec, 2 * spec.window + 1, budget)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatingCheck {
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub dim: usize,
    pub points: usize,
    /// `log₂` of the separated set found (exact maximum when `exact`).
    pub log2_left: f64,
    pub exact: bool,
    /// `log₂ [4^{-N} (1/ε)^{(1−δ) dim π_N}]`.
    pub log2_right: f64,
    pub margin: f64,
    pub pass: bool,
}

/// `#_sep(X, d̄_N, ε) ≥ 4^{-N} (1/ε)^{(1−δ) dim π_N(X)}` on the quantized action.
/// Above the exact budget a greedy separated set is used; it is a lower bound
/// on the left side, so a pass remains conclusive.
pub fn separating_bound_check(
    spec: &AlgebraicActionSpec,
    n: usize,
    eps: f64,
    delta: f64,
    budget: &Budget,
) -> Result<SeparatingCheck> {
    if !(0.0..1.0).contains(&delta) || !(eps > 0.0) {
        return invalid("need 0 ≤ δ < 1 and ε > 0");
    }
    let dim = projection_dim(spec, n.max(spec.a))?.dim;
    let sys = spec.system();
    let haar = haar_measure_len(spec, sys.depth_len(n), budget)?;
    let space = crate::systems::orbit_metric_on(&sys, &haar.words, n, OrbitKind::Avg);
    let exact = space.len() <= budget.exact_points;
    let mode = if exact { Mode::Exact } else { Mode::Greedy };
    let (count, _) = separating_number(&space, eps, mode, budget)?;
    let log2_left = (count as f64).log2();
    let log2_right = -2.0 * n as f64 + (1.0 - delta) * dim as f64 * (1.0 / eps).log2();
    let margin = log2_left - log2_right;
    Ok(SeparatingCheck {
        n,
        epsilon: eps,
        delta,
        dim,
        points: space.len(),
        log2_left,
        exact,
        log2_right,
        margin,
        pass: margin >= -1e-12,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatingScan {
    pub checks: Vec<SeparatingCheck>,
    /// Largest grid `ε` at and below which every check passes.
    pub threshold: Option<f64>,
}

pub fn separating_scan(
    spec: &AlgebraicActionSpec,
    n: usize,
    eps: &[f64],
    delta: f64,
    budget: &Budget,
) -> Result<SeparatingScan> {
    let mut checks = eps.iter().map(|&e| separating_bound_check(spec, n, e, delta, budget)).collect::<Result<Vec<_>>>()?;
    checks.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let threshold = checks.iter().take_while(|c| c.pass).last().map(|c| c.epsilon);
    Ok(SeparatingScan { checks, threshold })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBoundCheck {
    #[serde(rename = "N")]
    pub n: usize,
    pub epsilon: f64,
    pub dim: usize,
    /// `log₂` of a greedy `ε`-separated set, a lower bound on `log₂ #(A, ε)`.
    pub log2_lower: f64,
    /// `dim · log₂(1/4ε)`.
    pub log2_bound: f64,
    pub pass: bool,
}

/// `#(A, ε) ≥ (1/4ε)^{dim A}` for `A = π_N(X)` quantized, under the sup of
/// circle distances over all coordinates.
pub fn group_bound_check(spec: &AlgebraicActionSpec, n: usize, eps: f64, budget: &Budget) -> Result<GroupBoundCheck> {
    if eps < 1.0 / spec.q as f64 {
        return precondition(format!("ε = {eps} is below the grid spacing 1/q"));
    }
    let dim = projection_dim(spec, n.max(spec.a))?.dim;
    let haar = haar_measure_len(spec, n, budget)?;
    let alpha = spec.system().alphabet;
    let rho = alpha.rho_table();
    let m = haar.words.len();
    let mut dist = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let d = haar.words[i]
                .iter()
                .zip(&haar.words[j])
                .map(|(&x, &y)| rho[x as usize][y as usize])
                .fold(0.0, f64::max);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let space = FiniteMetricSpace { label: format!("pi_{n}"), points: vec![String::new(); m], dist };
    let (count, _) = separating_number(&space, eps, Mode::Greedy, budget)?;
    let log2_lower = (count as f64).log2();
    let log2_bound = dim as f64 * (1.0 / (4.0 * eps)).log2();
    Ok(GroupBoundCheck { n, epsilon: eps, dim, log2_lower, log2_bound, pass: log2_lower >= log2_bound - 1e-12 })
}

/// Copy constraints `x_n^{(l)} = x_{n+j}^{(l')}` reduce the action to free
/// torus variables. When every coordinate `l` sits on a single sequence with
/// distinct offsets `o_l` (so `x_n^{(l)} = b_{n+o_l}`), the structure is a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub offsets: Vec<usize>,
}

impl Chain {
    pub fn span(&self) -> usize {
        self.offsets.iter().copied().max().unwrap_or(0)
    }

    /// Free variables on a word of length `len`.
    pub fn vars(&self, len: usize) -> usize {
        len + self.span()
    }

    /// Kernel of `Σ_t 2^{-|t|} Σ_l c(b_{n+t+o_l})` over the chain variables.
    pub fn kernel(&self, window: usize) -> Vec<f64> {
        let base = shift_kernel(window);
        let mut k = vec![0.0; base.len() + self.span()];
        for (i, &w) in base.iter().enumerate() {
            for &o in &self.offsets {
                k[i + o] += w;
            }
        }
        k
    }
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut c = x;
    while parent[c] != r {
        let next = parent[c];
        parent[c] = r;
        c = next;
    }
    r
}

/// Detects a chain from the constraint rows, or `None` when the action is not
/// of that form.
pub fn detect_chain(spec: &AlgebraicActionSpec) -> Option<Chain> {
    let (r, a) = (spec.r, spec.a);
    let mut copies = Vec::new();
    for row in &spec.m {
        let nz: Vec<(usize, i64)> = row.iter().copied().enumerate().filter(|e| e.1 != 0).collect();
        match nz.as_slice() {
            [(i, u), (j, v)] if *u == -*v && u.abs() == 1 => copies.push((*i, *j)),
            _ => return None,
        }
    }
    // Union-find over a word long enough for every coordinate to meet its chain.
    let len = 4 * (a + r) + 4;
    let idx = |n: usize, l: usize| n * r + l;
    let mut parent: Vec<usize> = (0..len * r).collect();
    for start in 0..=len - a {
        for &(i, j) in &copies {
            let (x, y) = (find(&mut parent, start * r + i), find(&mut parent, start * r + j));
            parent[x] = y;
        }
    }
    let mid = len / 2;
    let anchor = find(&mut parent, idx(mid, 0));
    let mut rel = Vec::with_capacity(r);
    for l in 0..r {
        let hit = (0..len).find(|&n| find(&mut parent, idx(n, l)) == anchor)?;
        rel.push(mid as i64 - hit as i64);
    }
    let lo = *rel.iter().min()?;
    let offsets: Vec<usize> = rel.iter().map(|&o| (o - lo) as usize).collect();
    let mut sorted = offsets.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != r {
        return None;
    }
    // Verify the class structure everywhere away from the ends.
    let margin = a + r + sorted[r - 1];
    for n in margin..len - margin {
        for l in 0..r {
            for n2 in margin..len - margin {
                for l2 in 0..r {
                    let same = find(&mut parent, idx(n, l)) == find(&mut parent, idx(n2, l2));
                    if same != (n + offsets[l] == n2 + offsets[l2]) {
                        return None;
                    }
                }
            }
        }
    }
    Some(Chain { offsets })
}

/// Chain variable weights of `Σ_n w_n Σ_l c(x_n^{(l)})` for `d̄_N`.
fn chain_weights(chain: &Chain, window: usize, n: usize) -> Vec<f64> {
    let w = shift_block_weights(window, n);
    let mut out = vec![0.0; chain.vars(w.len())];
    for (i, &wi) in w.iter().enumerate() {
        for &o in &chain.offsets {
            out[i + o] += wi;
        }
    }
    out
}

fn cycle_letter(q: usize) -> Letter {
    Letter {
        source: vec![1.0 / q as f64; q],
        rho: (0..q).map(|x| (0..q).map(|y| circle(x, y, q)).collect()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RdPath {
    /// Enumerated Haar measure, Blahut–Arimoto on `d̄_N`, greedy covers of `d_N`.
    Dense,
    /// Chain variables: `d ≤ d_sum ≤ r·d` with `d_sum` additive over them.
    Chain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicReport {
    pub spec: AlgebraicActionSpec,
    pub prodim: ProdimReport,
    pub path: RdPath,
    /// Rate-distortion profile. On the chain path this is `R` for `d_sum`,
    /// an upper bound on the rate for `d̄_N`.
    pub rd: RdProfile,
    /// Chain path only: `R` for `d_sum` at `r·ε`, a lower bound.
    pub rd_lower: Option<RdProfile>,
    pub covering_samples: Vec<CoveringSample>,
    /// Slope of the covering upper bound at the largest `N` (the `mdim_M` proxy).
    pub covering: DimensionEstimate,
    pub covering_lower: DimensionEstimate,
    pub checks: Vec<SlopeCheck>,
    pub truncation_error: f64,
}

pub fn rdim_prodim_experiment(
    spec: &AlgebraicActionSpec,
    eps: &[f64],
    ns: &[usize],
    weighting: Weighting,
    budget: &Budget,
) -> Result<AlgebraicReport> {
    spec.validate()?;
    let sys = spec.system();
    let pd = prodim(spec, &ns.iter().map(|&n| n.max(spec.a)).collect::<Vec<_>>())?;
    let nmax = *ns.iter().max().ok_or_else(|| Error::Invalid("empty N list".into()))?;
    let dense_size = quantization_check(spec, sys.depth_len(nmax))?.solutions(spec.q).unwrap_or(u128::MAX);
    let chain = detect_chain(spec);
    let path = if dense_size <= budget.enumeration_points || chain.is_none() { RdPath::Dense } else { RdPath::Chain };
    let label = format!("algebraic r={} q={} W={}", spec.r, spec.q, spec.window);
    let mut points = Vec::new();
    let mut lower_points = Vec::new();
    let mut covering_samples = Vec::new();
    for &n in ns {
        match (path, &chain) {
            (RdPath::Chain, Some(ch)) => {
                let coords = chain_weights(ch, spec.window, n).into_iter().map(|w| (0, w)).collect();
                let src = AdditiveSource { letters: vec![cycle_letter(spec.q)], coords };
                let kernel = ch.kernel(spec.window);
                for &e in eps {
                    let hi = src.rate_at(e)?;
                    let lo = src.rate_at(spec.r as f64 * e)?;
                    points.push(rd_point(e, n, hi.rate, hi.lower, hi.distortion, hi.converged, hi.iterations));
                    lower_points.push(rd_point(e, n, lo.rate, lo.lower, lo.distortion, lo.converged, lo.iterations));
                    let b = box_cover_bounds(&BoxLetter::Cycle(spec.q), &kernel, n, e, 1.0)?;
                    covering_samples.push(sample(e, n, b.log2_upper, b.log2_lower));
                }
            }
            _ => {
                let haar = haar_measure_len(spec, sys.depth_len(n), budget)?;
                let (dmax, _) = orbit_metric(&sys, n, OrbitKind::Max, budget)?;
                for &e in eps {
                    points.push(dynamical_rd(&sys, &haar, n, e, None)?);
                    let (up, _) = covering_number(&dmax, e, Mode::Greedy, budget)?;
                    let (lo, _) = separating_number(&dmax, e, Mode::Greedy, budget)?;
                    covering_samples.push(sample(e, n, (up as f64).log2(), (lo as f64).log2()));
                }
            }
        }
    }
    let trunc = sys.truncation_error();
    let rd = rd_profile_from(&label, RdCurve { source: format!("{label} haar"), points }, ns, weighting, trunc)?;
    let rd_lower = if path == RdPath::Chain {
        let curve = RdCurve { source: format!("{label} haar, d_sum at r·ε"), points: lower_points };
        Some(rd_profile_from(&format!("{label} lower"), curve, ns, weighting, trunc)?)
    } else {
        None
    };
    let at: Vec<&CoveringSample> = covering_samples.iter().filter(|s| s.n == nmax).collect();
    let xs: Vec<f64> = at.iter().map(|s| s.epsilon).collect();
    let covering = fit_slope(&xs, &at.iter().map(|s| s.s_upper).collect::<Vec<_>>(), weighting)?;
    let covering_lower = fit_slope(&xs, &at.iter().map(|s| s.s_lower).collect::<Vec<_>>(), weighting)?;
    let mut checks = vec![
        check("prodim <= rdim slope", pd.value(), rd.estimate.slope),
        check("rdim slope <= covering slope", rd.estimate.slope, covering.slope),
        check("prodim <= covering slope", pd.value(), covering.slope),
    ];
    if let Some(l) = &rd_lower {
        checks.push(check("prodim <= lower rdim slope", pd.value(), l.estimate.slope));
    }
    Ok(AlgebraicReport {
        spec: spec.clone(),
        prodim: pd,
        path,
        rd,
        rd_lower,
        covering_samples,
        covering,
        covering_lower,
        checks,
        truncation_error: trunc,
    })
}

fn rd_point(e: f64, n: usize, rate: f64, lower: f64, distortion: f64, converged: bool, iterations: usize) -> RdPoint {
    let k = n as f64;
    RdPoint { epsilon: e, n, rate: rate / k, lower: lower / k, distortion, converged, iterations }
}

fn sample(e: f64, n: usize, up: f64, lo: f64) -> CoveringSample {
    CoveringSample { epsilon: e, n, log2_upper: up, log2_lower: lo, s_upper: up / n as f64, s_lower: lo / n as f64 }
}

fn check(name: &str, lhs: f64, rhs: f64) -> SlopeCheck {
    SlopeCheck { name: name.into(), lhs, rhs, pass: lhs <= rhs + SLOPE_TOL }
}
