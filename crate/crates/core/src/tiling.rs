//! Voronoi tilings of the line from marker heights: site `a` sits at
//! `(a, 1/φ(T^a x))` and owns the axis points closest to it.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, precondition, Result};

pub const EQUIVARIANCE_TOL: f64 = 1e-9;

/// `φ(T^a x)` for `a = start, start+1, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerTrace {
    pub start: i64,
    pub values: Vec<f64>,
}

impl MarkerTrace {
    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.values.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
            return invalid(format!("marker value {v} outside [0,1]"));
        }
        if !self.values.iter().any(|&v| v > 0.0) {
            return precondition("marker trace has no positive value");
        }
        Ok(())
    }

    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    /// Trace of `T^n x`: `φ(T^a T^n x) = φ(T^{a+n} x)`.
    pub fn shifted(&self, n: i64) -> MarkerTrace {
        MarkerTrace { start: self.start - n, values: self.values.clone() }
    }

    fn sites(&self) -> Vec<(i64, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, &v)| (self.start + i as i64, 1.0 / v))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tiling {
    /// Closed cells `I_φ(x,a)` lying inside the trusted range.
    pub intervals: BTreeMap<i64, (f64, f64)>,
    /// Sites in the trusted range whose cell is empty (including `φ = 0`).
    pub empty: Vec<i64>,
    /// Cell endpoints in the trusted range, sorted, shared endpoints once.
    pub boundary: Vec<f64>,
    /// Range unaffected by sites outside the trace.
    pub trusted: (f64, f64),
    /// Largest nearest-site distance over the trace; the edge margin.
    pub margin: f64,
}

fn bisector(a: i64, ha: f64, b: i64, hb: f64) -> f64 {
    0.5 * (a + b) as f64 + (hb * hb - ha * ha) / (2.0 * (b - a) as f64)
}

/// Exact cells of every positive site, as `(a, left, right)`, possibly
/// with `left > right` (empty).
fn raw_cells(sites: &[(i64, f64)]) -> Vec<(i64, f64, f64)> {
    sites
        .iter()
        .enumerate()
        .map(|(i, &(a, ha))| {
            let left = sites[..i].iter().map(|&(b, hb)| bisector(a, ha, b, hb)).fold(f64::NEG_INFINITY, f64::max);
            let right = sites[i + 1..].iter().map(|&(b, hb)| bisector(a, ha, b, hb)).fold(f64::INFINITY, f64::min);
            (a, left, right)
        })
        .collect()
}

fn nearest_distance(sites: &[(i64, f64)], u: f64) -> f64 {
    sites
        .iter()
        .map(|&(b, h)| ((u - b as f64).powi(2) + h * h).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// The Voronoi cells of the trace restricted to its trusted range.
pub fn tile(trace: &MarkerTrace) -> Result<Tiling> {
    trace.validate()?;
    let sites = trace.sites();
    let cells = raw_cells(&sites);
    let (lo, hi) = (trace.start as f64, trace.end() as f64);
    // Nearest-site distance is convex on each cell, so its maximum over
    // [lo, hi] is attained at a cell endpoint or at lo, hi.
    let mut margin = nearest_distance(&sites, lo).max(nearest_distance(&sites, hi));
    for &(_, l, r) in &cells {
        for u in [l, r] {
            if u.is_finite() && u >= lo && u <= hi {
                margin = margin.max(nearest_distance(&sites, u));
            }
        }
    }
    let trusted = (lo + margin, hi - margin);
    let mut intervals = BTreeMap::new();
    let mut empty = Vec::new();
    for &(a, l, r) in &cells {
        if l > r {
            if (a as f64) >= trusted.0 && (a as f64) <= trusted.1 {
                empty.push(a);
            }
        } else if l >= trusted.0 && r <= trusted.1 {
            intervals.insert(a, (l, r));
        }
    }
    for (i, &v) in trace.values.iter().enumerate() {
        let a = trace.start + i as i64;
        if v == 0.0 && (a as f64) >= trusted.0 && (a as f64) <= trusted.1 {
            empty.push(a);
        }
    }
    empty.sort_unstable();
    let mut boundary: Vec<f64> = intervals.values().flat_map(|&(l, r)| [l, r]).collect();
    boundary.sort_by(f64::total_cmp);
    boundary.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
    Ok(Tiling { intervals, empty, boundary, trusted, margin })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub compared: usize,
    pub discrepancy: f64,
    pub pass: bool,
}

/// Compares `I(T^n x, a)` with `I(x, a+n) − n` over cells present in both.
pub fn check_equivariance(t_x: &Tiling, t_tx: &Tiling, n: i64) -> Result<EquivarianceReport> {
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for (&a, &(l, r)) in &t_tx.intervals {
        if let Some(&(l0, r0)) = t_x.intervals.get(&(a + n)) {
            compared += 1;
            worst = worst.max((l - (l0 - n as f64)).abs()).max((r - (r0 - n as f64)).abs());
        }
    }
    if compared == 0 {
        return precondition("tilings share no trusted cells");
    }
    Ok(EquivarianceReport { compared, discrepancy: worst, pass: worst <= EQUIVARIANCE_TOL })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    /// `max |∂ ∩ [0,R]| / R` over the traces.
    pub density: f64,
    /// Largest `max(a − left, right − a)` over trusted cells.
    pub m_emp: f64,
}

pub fn boundary_density(traces: &[MarkerTrace], r: f64) -> Result<DensityReport> {
    if traces.is_empty() || !(r > 0.0) {
        return invalid("need at least one trace and R > 0");
    }
    let mut density: f64 = 0.0;
    let mut m_emp: f64 = 0.0;
    for t in traces {
        let tl = tile(t)?;
        if tl.trusted.0 > 0.0 || tl.trusted.1 < r {
            return precondition(format!("[0, {r}] is not inside the trusted range {:?}", tl.trusted));
        }
        let count = tl.boundary.iter().filter(|&&u| (0.0..=r).contains(&u)).count();
        density = density.max(count as f64 / r);
        for (&a, &(lo, hi)) in &tl.intervals {
            m_emp = m_emp.max(a as f64 - lo).max(hi - a as f64);
        }
    }
    Ok(DensityReport { density, m_emp })
}

/// Half the largest gap between consecutive height-one sites (`φ = 1`): every
/// cell point between the first and last such site lies this close to its own
/// site.
pub fn structural_bound(trace: &MarkerTrace) -> Option<f64> {
    let ones: Vec<i64> = trace.sites().into_iter().filter(|s| s.1 == 1.0).map(|s| s.0).collect();
    ones.windows(2).map(|w| (w[1] - w[0]) as f64 / 2.0).fold(None, |m, g| Some(m.map_or(g, |v: f64| v.max(g))))
}

/// A trace built the way the boundary-density argument does: positive sites
/// more than `n` apart, every other one at height one, the rest at random
/// heights in `[1/2, 1]`.
pub fn lemma_trace<R: Rng>(rng: &mut R, start: i64, len: usize, n: usize) -> MarkerTrace {
    let mut values = vec![0.0; len];
    let mut i = rng.gen_range(0..=n);
    let mut one = true;
    while i < len {
        values[i] = if one { 1.0 } else { rng.gen_range(0.5..=1.0) };
        one = !one;
        i += rng.gen_range(n + 1..=2 * n + 1);
    }
    MarkerTrace { start, values }
}
