//! Covering-number bounds for shift blocks too large to enumerate.
//!
//! The block metric is written over independent letter coordinates as
//! `max_n Σ_i k[i-n] ρ(x_i, y_i)` with a sliding kernel `k`. A product of
//! per-coordinate blocks of diameters `r_i` then has diameter exactly
//! `max_n Σ_i k[i-n] r_i`, so every admissible choice of widths gives a cover
//! and `Π_i #(letter, r_i)` is an upper bound on the covering number. A
//! dynamic program over the last `|k|-1` widths minimizes that product.
//! A product of per-coordinate separated sets gives the matching lower bound.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Error, Result};
use crate::metric::DIAM_TOL;

/// One-dimensional letter geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Letter {
    /// Reals under `|·|`.
    Line(Vec<f64>),
    /// `q` equally spaced points on the unit circle.
    Cycle(usize),
}

impl Letter {
    pub fn size(&self) -> usize {
        match self {
            Letter::Line(v) => v.len(),
            Letter::Cycle(q) => *q,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Letter::Line(v) => {
                let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            }
            Letter::Cycle(q) => (q / 2) as f64 / *q as f64,
        }
    }

    /// Fewest blocks of diameter `≤ r`.
    pub fn cover_count(&self, r: f64) -> usize {
        match self {
            Letter::Line(v) => {
                let mut s = v.clone();
                s.sort_by(f64::total_cmp);
                let mut count = 0;
                let mut i = 0;
                while i < s.len() {
                    let start = s[i];
                    count += 1;
                    while i < s.len() && s[i] - start <= r + DIAM_TOL {
                        i += 1;
                    }
                }
                count
            }
            Letter::Cycle(q) => {
                let q = *q;
                if r + DIAM_TOL >= self.diameter() {
                    return 1;
                }
                // m consecutive grid points have diameter (m-1)/q.
                let m = ((r + DIAM_TOL) * q as f64).floor() as usize + 1;
                q.div_ceil(m.max(1))
            }
        }
    }

    /// Most points with pairwise distance `≥ g`.
    pub fn separated_count(&self, g: f64) -> usize {
        if g <= 0.0 {
            return self.size();
        }
        match self {
            Letter::Line(v) => {
                let mut s = v.clone();
                s.sort_by(f64::total_cmp);
                let mut count = 1;
                let mut last = s[0];
                for &x in &s[1..] {
                    if x - last >= g - DIAM_TOL {
                        count += 1;
                        last = x;
                    }
                }
                count
            }
            Letter::Cycle(q) => {
                let q = *q;
                if g > self.diameter() + DIAM_TOL {
                    return 1;
                }
                let step = ((g - DIAM_TOL) * q as f64).ceil().max(1.0) as usize;
                (q / step).max(1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverBounds {
    /// `log₂` of a product-cover size: an upper bound on `log₂ #`.
    pub log2_upper: f64,
    /// `log₂` of a product separated set: a lower bound on `log₂ #`.
    pub log2_lower: f64,
    /// Chosen width per coordinate for the upper bound.
    pub widths: Vec<f64>,
    pub candidates: usize,
}

/// Largest DP table (`candidates^(|k|-1)` states) the solver will allocate.
pub const MAX_STATES: usize = 1 << 24;

/// Bounds on `log₂ #(ε)` for the metric `max_{n<N} Σ_i k[i-n] ρ(x_i,y_i)` over
/// `|k| + N - 1` coordinates, each carrying `letter`.
///
/// `lower_scale` multiplies the kernel for the lower bound; pass `1` when the
/// kernel is exact and a comparison constant when it only dominates the metric.
pub fn box_cover_bounds(letter: &Letter, kernel: &[f64], n: usize, eps: f64, lower_scale: f64) -> Result<CoverBounds> {
    if kernel.is_empty() || n == 0 {
        return invalid("kernel must be nonempty and N >= 1");
    }
    if !(eps > 0.0) {
        return invalid("ε must be positive");
    }
    if eps <= 1e2 * DIAM_TOL {
        return precondition(format!("ε = {eps:e} is too close to the diameter tolerance {DIAM_TOL:e}"));
    }
    let kappa = kernel.len();
    let len = kappa + n - 1;
    let cand = candidates(letter, kernel, eps);
    let nc = cand.len();
    let state_len = kappa - 1;
    let states = nc.checked_pow(state_len as u32).filter(|&s| s <= MAX_STATES).ok_or(Error::Capacity {
        what: "box-cover dynamic program".into(),
        needed: (nc as u128).saturating_pow(state_len as u32),
        limit: MAX_STATES as u128,
        knob: "box_cover_states",
    })?;
    let log_count: Vec<f64> = cand.iter().map(|&(_, c)| (c as f64).log2()).collect();
    // A state holds the last `state_len` choices, newest in the lowest digit.
    // `back[i][t]` records (previous state, choice) for coordinate i.
    let mut cost = vec![0.0f64];
    let mut back: Vec<Vec<(u32, u8)>> = Vec::with_capacity(len);
    for _ in 0..state_len {
        let mut next = vec![f64::INFINITY; cost.len() * nc];
        let mut bk = vec![(0u32, 0u8); cost.len() * nc];
        for (s, &c0) in cost.iter().enumerate() {
            for (ci, lc) in log_count.iter().enumerate() {
                next[s * nc + ci] = c0 + lc;
                bk[s * nc + ci] = (s as u32, ci as u8);
            }
        }
        cost = next;
        back.push(bk);
    }
    let mut pow = vec![1usize; kappa];
    for j in 1..kappa {
        pow[j] = pow[j - 1] * nc;
    }
    let limit = eps - DIAM_TOL;
    // Digit j of a state is the choice made j+1 coordinates ago.
    let partial: Vec<f64> = (0..states)
        .map(|s| (0..state_len).map(|j| kernel[kappa - 2 - j] * cand[(s / pow[j]) % nc].0).sum())
        .collect();
    let last = kernel[kappa - 1];
    for _ in 0..n {
        let mut next = vec![f64::INFINITY; states];
        let mut bk = vec![(u32::MAX, 0u8); states];
        for (s, &c0) in cost.iter().enumerate() {
            if !c0.is_finite() {
                continue;
            }
            let base = (s * nc) % states;
            for (ci, lc) in log_count.iter().enumerate() {
                if partial[s] + last * cand[ci].0 >= limit {
                    // Widths are increasing, so larger choices fail too.
                    break;
                }
                let t = (base + ci) % states;
                let v = c0 + lc;
                if v < next[t] {
                    next[t] = v;
                    bk[t] = (s as u32, ci as u8);
                }
            }
        }
        cost = next;
        back.push(bk);
    }
    let (mut s, best) = cost
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    if !best.is_finite() {
        return Err(Error::Numeric("box-cover program found no admissible widths".into()));
    }
    let mut widths = vec![0.0; len];
    for i in (0..len).rev() {
        let (prev, ci) = back[i][s];
        widths[i] = cand[ci as usize].0;
        s = prev as usize;
    }
    let log2_lower = lattice_lower(letter, kernel, n, eps, lower_scale);
    Ok(CoverBounds { log2_upper: best, log2_lower, widths, candidates: nc })
}

/// Pareto breakpoints `(r, #(letter, r))`: the least width for each count.
fn breakpoints(letter: &Letter) -> Vec<(f64, usize)> {
    let mut ds: Vec<f64> = match letter {
        Letter::Line(v) => {
            let mut d = vec![0.0];
            for (i, a) in v.iter().enumerate() {
                for b in &v[i + 1..] {
                    d.push((a - b).abs());
                }
            }
            d
        }
        Letter::Cycle(q) => (0..=q / 2).map(|j| j as f64 / *q as f64).collect(),
    };
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    let mut out: Vec<(f64, usize)> = Vec::new();
    for r in ds {
        let c = letter.cover_count(r);
        match out.last() {
            Some(&(_, lc)) if c >= lc => {}
            _ => out.push((r, c)),
        }
    }
    out
}

/// Candidate widths: a half-octave ladder around `ε/max k` and up to
/// `ε/min k`, each rung snapped down to the letter's nearest breakpoint.
fn candidates(letter: &Letter, kernel: &[f64], eps: f64) -> Vec<(f64, usize)> {
    let kmax = kernel.iter().copied().fold(0.0, f64::max);
    let kmin = kernel.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let bps = breakpoints(letter);
    let mut rungs = Vec::new();
    let mut r = eps / kmax * 2f64.powi(-6);
    let top = eps / kmin;
    while r <= top * (1.0 + 1e-12) {
        rungs.push(r);
        r *= std::f64::consts::SQRT_2;
    }
    rungs.push(top);
    let mut out: Vec<(f64, usize)> = vec![bps[0]];
    for r in rungs {
        if let Some(&bp) = bps.iter().rev().find(|b| b.0 <= r) {
            if out.last().is_none_or(|l| bp.1 < l.1) {
                out.push(bp);
            }
        }
    }
    // Keep at most 10 candidates, thinning evenly but keeping both ends.
    while out.len() > 10 {
        let last = out.len() - 1;
        out = out
            .iter()
            .enumerate()
            .filter(|(i, _)| *i == 0 || *i == last || i % 2 == 1)
            .map(|(_, v)| *v)
            .collect();
    }
    out
}

/// `Σ_i log₂ #sep(letter, ε / (scale·max_n k[i-n]))`: points of a product of
/// separated sets differ in some coordinate `i`, which alone contributes at
/// least `ε` in the window weighting it most.
pub fn lattice_lower(letter: &Letter, kernel: &[f64], n: usize, eps: f64, scale: f64) -> f64 {
    let kappa = kernel.len();
    let len = kappa + n - 1;
    (0..len)
        .map(|i| {
            let kmax = (0..n)
                .filter(|&off| i >= off && i - off < kappa)
                .map(|off| kernel[i - off])
                .fold(0.0, f64::max)
                * scale;
            if kmax <= 0.0 {
                0.0
            } else {
                (letter.separated_count(eps / kmax) as f64).log2()
            }
        })
        .sum()
}

/// Shift-metric kernel `2^{-|t|}`, `t = -W..=W`.
pub fn shift_kernel(window: usize) -> Vec<f64> {
    let w = window as i64;
    (-w..=w).map(crate::systems::weight).collect()
}
