//! Dense two-phase tableau simplex with deterministic pivoting.
//!
//! Entering column: most negative reduced cost, lowest index on ties; after a
//! run of degenerate pivots the rule switches to Bland's to rule out cycling.
//! Leaving row: minimum ratio, lowest basic column index on ties.

use crate::error::{Error, Result};

pub const LP_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coef: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// `max c·x` (or `min`) subject to rows, `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct Lp {
    pub c: Vec<f64>,
    pub rows: Vec<Row>,
    pub maximize: bool,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Row multipliers `y` with `value = y·b` at optimality.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

struct Tableau {
    m: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.at(pr, pc);
        for c in 0..w {
            self.t[pr * w + c] /= p;
        }
        let prow: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.m {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                let row = &mut self.t[r * w..(r + 1) * w];
                for (x, &y) in row.iter_mut().zip(&prow) {
                    *x -= f * y;
                }
            }
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Runs simplex on the objective stored in row `m`; only columns with
    /// `allowed[c]` may enter.
    fn run(&mut self, allowed: &[bool], max_pivots: usize) -> Result<()> {
        let rhs = self.width - 1;
        let obj = self.m;
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            // Once stalling is detected Bland's rule stays on: switching back
            // lets rounding noise reopen a cycle.
            bland |= degenerate > 50;
            let mut enter = None;
            let mut best = -LP_TOL;
            for c in (0..allowed.len()).filter(|&c| allowed[c]) {
                let v = self.at(obj, c);
                if bland {
                    if v < -LP_TOL {
                        enter = Some(c);
                        break;
                    }
                } else if v < best {
                    best = v;
                    enter = Some(c);
                }
            }
            let Some(pc) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, rhs) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12
                                || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, ratio)) = leave else {
                return Err(Error::Numeric("linear program is unbounded".into()));
            };
            if ratio.abs() < 1e-11 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
            if self.pivots > max_pivots {
                return Err(Error::Numeric(format!("simplex exceeded {max_pivots} pivots")));
            }
        }
    }
}

pub fn solve(lp: &Lp) -> Result<LpSolution> {
    let n = lp.c.len();
    let m = lp.rows.len();
    for (i, r) in lp.rows.iter().enumerate() {
        if r.coef.len() != n {
            return Err(Error::Invalid(format!("LP row {i} has {} coefficients, expected {n}", r.coef.len())));
        }
        if !r.rhs.is_finite() || r.coef.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("LP row {i} has non-finite data")));
        }
    }
    // Normalize to b ≥ 0.
    let mut rows: Vec<(Vec<f64>, Cmp, f64, bool)> = lp
        .rows
        .iter()
        .map(|r| {
            if r.rhs < 0.0 {
                let cmp = match r.cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                (r.coef.iter().map(|v| -v).collect(), cmp, -r.rhs, true)
            } else {
                (r.coef.clone(), r.cmp, r.rhs, false)
            }
        })
        .collect();

    // Columns: x (n) | surplus for Ge rows | identity column per row (slack or artificial) | rhs.
    let n_ge = rows.iter().filter(|r| r.1 == Cmp::Ge).count();
    let id0 = n + n_ge;
    let width = id0 + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    let mut basis = Vec::with_capacity(m);
    let mut artificial = vec![false; m];
    let mut g = 0;
    for (i, (coef, cmp, rhs, _)) in rows.iter_mut().enumerate() {
        t[i * width..i * width + n].copy_from_slice(coef);
        if *cmp == Cmp::Ge {
            t[i * width + n + g] = -1.0;
            g += 1;
        }
        t[i * width + id0 + i] = 1.0;
        t[i * width + width - 1] = *rhs;
        basis.push(id0 + i);
        artificial[i] = *cmp != Cmp::Le;
    }
    let mut tab = Tableau { m, width, t, basis, pivots: 0 };
    let max_pivots = 50 * (m + width) + 1000;

    // Phase 1: minimize the sum of artificials (as max of its negative).
    if artificial.iter().any(|&a| a) {
        for i in 0..m {
            if artificial[i] {
                for c in 0..width {
                    let v = tab.at(i, c);
                    tab.t[m * width + c] -= v;
                }
                tab.t[m * width + id0 + i] = 0.0;
            }
        }
        tab.run(&vec![true; width - 1], max_pivots)?;
        let infeas = -tab.at(m, width - 1);
        if infeas > 1e-7 {
            return Err(Error::Numeric(format!("linear program is infeasible (phase-1 residual {infeas:.3e})")));
        }
        // Drive remaining artificial basics out where possible.
        for r in 0..m {
            let b = tab.basis[r];
            if b >= id0 && artificial[b - id0] {
                if let Some(c) = (0..id0).find(|&c| tab.at(r, c).abs() > 1e-9) {
                    tab.pivot(r, c);
                }
            }
        }
    }

    // Phase 2 objective row: reduced costs of a max problem.
    let sign = if lp.maximize { 1.0 } else { -1.0 };
    for c in 0..width {
        tab.t[m * width + c] = 0.0;
    }
    for j in 0..n {
        tab.t[m * width + j] = -sign * lp.c[j];
    }
    for r in 0..m {
        let b = tab.basis[r];
        let cb = if b < n { sign * lp.c[b] } else { 0.0 };
        if cb != 0.0 {
            for c in 0..width {
                let v = tab.at(r, c);
                tab.t[m * width + c] += cb * v;
            }
        }
    }
    // Artificial columns may not re-enter; slack columns may.
    let mut allowed_cols: Vec<bool> = vec![true; width - 1];
    for i in 0..m {
        if artificial[i] {
            allowed_cols[id0 + i] = false;
        }
    }
    tab.run(&allowed_cols, max_pivots)?;

    let mut x = vec![0.0; n];
    for r in 0..m {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.at(r, width - 1).max(0.0);
        }
    }
    let value: f64 = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    let duals = (0..m)
        .map(|i| {
            let y = sign * tab.at(m, id0 + i);
            if rows[i].3 {
                -y
            } else {
                y
            }
        })
        .collect();
    Ok(LpSolution { x, value, duals, pivots: tab.pivots })
}
