//! Coarse Hausdorff content, the weighted content `λ^s_δ` as a covering LP,
//! dimension profiles and Frostman measures read off the LP dual.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{invalid, precondition, Error, Result};
use crate::estimate::{fit_slope, DimensionEstimate, Weighting};
use crate::lp::{self, Cmp, Lp, Row};
use crate::metric::{below, FiniteMetricSpace, Mode};
use crate::systems::{orbit_metric, OrbitKind, SystemSpec};

/// Slack accepted on LP feasibility, duality and scaling-law checks.
pub const CERT_TOL: f64 = 1e-9;
/// Upper end of the bisection bracket for [`dim_profile`].
pub const S_MAX: f64 = 64.0;
const S_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    AllSubsets,
    /// Closed metric balls `B(x, r)` for every centre and every distance `r`.
    #[default]
    Balls,
}

/// `(τ + diam)^s` with `0^0 = 1`.
pub fn block_cost(diam: f64, s: f64, tau: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        (tau + diam).powf(s)
    }
}

fn check_query(s: f64, scale: f64, tau: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return invalid(format!("exponent s must be finite and nonnegative, got {s}"));
    }
    if !(scale > 0.0) {
        return invalid(format!("scale must be positive, got {scale}"));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return invalid(format!("offset τ must be finite and nonnegative, got {tau}"));
    }
    Ok(())
}

/// Blocks of diameter `< scale` from the family, singletons first, sorted and
/// deduplicated.
pub fn candidate_blocks(space: &FiniteMetricSpace, scale: f64, family: Family, budget: &Budget) -> Result<Vec<Vec<usize>>> {
    let n = space.len();
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
    match family {
        Family::AllSubsets => {
            budget.check_subsets(n)?;
            // Every clique of the `< scale` proximity graph.
            fn grow(space: &FiniteMetricSpace, scale: f64, cur: &mut Vec<usize>, from: usize, out: &mut BTreeSet<Vec<usize>>) {
                for v in from..space.len() {
                    if cur.iter().all(|&u| below(space.d(u, v), scale)) {
                        cur.push(v);
                        out.insert(cur.clone());
                        grow(space, scale, cur, v + 1, out);
                        cur.pop();
                    }
                }
            }
            grow(space, scale, &mut Vec::new(), 0, &mut out);
        }
        Family::Balls => {
            for x in 0..n {
                let mut by: Vec<usize> = (0..n).collect();
                by.sort_by(|&a, &b| space.d(x, a).total_cmp(&space.d(x, b)).then(a.cmp(&b)));
                let mut i = 0;
                while i < n {
                    let r = space.d(x, by[i]);
                    while i < n && space.d(x, by[i]) <= r {
                        i += 1;
                    }
                    let mut ball = by[..i].to_vec();
                    ball.sort_unstable();
                    if below(space.block_diameter(&ball), scale) {
                        out.insert(ball);
                    } else {
                        break;
                    }
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = out.into_iter().collect();
    blocks.sort_by_key(|b| b.len());
    Ok(blocks)
}

/// `inf Σ(τ + diam E)^s` over partitions into blocks of diameter `< ε`, with
/// the optimal blocks. Greedy mode returns an upper bound.
pub fn hausdorff_content(
    space: &FiniteMetricSpace,
    s: f64,
    eps: f64,
    tau: f64,
    mode: Mode,
    budget: &Budget,
) -> Result<(f64, Vec<Vec<usize>>)> {
    check_query(s, eps, tau)?;
    space.check_shape()?;
    if space.is_empty() {
        return Ok((0.0, vec![]));
    }
    let (mut value, mut blocks) = greedy_content(space, s, eps, tau);
    if mode == Mode::Exact {
        budget.check_exact("hausdorff_content", space.len())?;
        let (v, b) = exact_content(space, s, eps, tau, value, blocks);
        value = v;
        blocks = b;
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort();
    Ok((value, blocks))
}

/// Agglomerative merging from singletons, always taking the merge that
/// lowers the cost most.
fn greedy_content(space: &FiniteMetricSpace, s: f64, eps: f64, tau: f64) -> (f64, Vec<Vec<usize>>) {
    let mut blocks: Vec<(Vec<usize>, f64)> = (0..space.len()).map(|i| (vec![i], 0.0)).collect();
    loop {
        let mut best: Option<(f64, usize, usize, f64)> = None;
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                let mut diam = blocks[i].1.max(blocks[j].1);
                for &u in &blocks[i].0 {
                    for &v in &blocks[j].0 {
                        diam = diam.max(space.d(u, v));
                    }
                }
                if !below(diam, eps) {
                    continue;
                }
                let gain = block_cost(blocks[i].1, s, tau) + block_cost(blocks[j].1, s, tau) - block_cost(diam, s, tau);
                if gain > 0.0 && best.map_or(true, |b| gain > b.0) {
                    best = Some((gain, i, j, diam));
                }
            }
        }
        let Some((_, i, j, diam)) = best else { break };
        let moved = blocks.swap_remove(j).0;
        blocks[i].0.extend(moved);
        blocks[i].1 = diam;
    }
    let value = blocks.iter().map(|b| block_cost(b.1, s, tau)).sum();
    (value, blocks.into_iter().map(|b| b.0).collect())
}

/// Branch-and-bound over partitions. Costs only grow as points are added, so
/// the partial cost is a valid bound.
fn exact_content(
    space: &FiniteMetricSpace,
    s: f64,
    eps: f64,
    tau: f64,
    seed_value: f64,
    seed: Vec<Vec<usize>>,
) -> (f64, Vec<Vec<usize>>) {
    struct Search<'a> {
        space: &'a FiniteMetricSpace,
        s: f64,
        eps: f64,
        tau: f64,
        blocks: Vec<(Vec<usize>, f64)>,
        cost: f64,
        best: f64,
        best_blocks: Vec<Vec<usize>>,
    }
    impl Search<'_> {
        fn go(&mut self, v: usize) {
            if self.cost >= self.best - 1e-15 {
                return;
            }
            if v == self.space.len() {
                self.best = self.cost;
                self.best_blocks = self.blocks.iter().map(|b| b.0.clone()).collect();
                return;
            }
            for b in 0..self.blocks.len() {
                let grown = self.blocks[b].0.iter().fold(self.blocks[b].1, |m, &u| m.max(self.space.d(u, v)));
                if !below(grown, self.eps) {
                    continue;
                }
                let old = self.blocks[b].1;
                let delta = block_cost(grown, self.s, self.tau) - block_cost(old, self.s, self.tau);
                self.blocks[b].0.push(v);
                self.blocks[b].1 = grown;
                self.cost += delta;
                self.go(v + 1);
                self.cost -= delta;
                self.blocks[b].1 = old;
                self.blocks[b].0.pop();
            }
            let c = block_cost(0.0, self.s, self.tau);
            self.blocks.push((vec![v], 0.0));
            self.cost += c;
            self.go(v + 1);
            self.cost -= c;
            self.blocks.pop();
        }
    }
    let mut search = Search {
        space,
        s,
        eps,
        tau,
        blocks: Vec::new(),
        cost: 0.0,
        best: seed_value + 1e-12,
        best_blocks: seed.clone(),
    };
    search.go(0);
    if search.best >= seed_value {
        (seed_value, seed)
    } else {
        (search.best, search.best_blocks)
    }
}

/// Optimal fractional cover and its dual measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedCover {
    pub s: f64,
    pub delta: f64,
    pub tau: f64,
    pub family: Family,
    pub value: f64,
    pub blocks: Vec<Vec<usize>>,
    pub costs: Vec<f64>,
    /// Primal weight `c_E` per block.
    pub weights: Vec<f64>,
    /// Dual weight per point.
    pub dual: Vec<f64>,
    pub pivots: usize,
}

/// `λ^s_δ`: `min Σ c_E (τ + diam E)^s` subject to `Σ_{E∋x} c_E ≥ 1`.
pub fn weighted_content(
    space: &FiniteMetricSpace,
    s: f64,
    delta: f64,
    tau: f64,
    family: Family,
    budget: &Budget,
) -> Result<WeightedCover> {
    check_query(s, delta, tau)?;
    space.check_shape()?;
    let blocks = candidate_blocks(space, delta, family, budget)?;
    let costs: Vec<f64> = blocks.iter().map(|b| block_cost(space.block_diameter(b), s, tau)).collect();
    if space.is_empty() {
        return Ok(WeightedCover {
            s,
            delta,
            tau,
            family,
            value: 0.0,
            blocks,
            costs,
            weights: vec![],
            dual: vec![],
            pivots: 0,
        });
    }
    let rows: Vec<Row> = (0..space.len())
        .map(|x| Row {
            coef: blocks.iter().map(|b| if b.binary_search(&x).is_ok() { 1.0 } else { 0.0 }).collect(),
            cmp: Cmp::Ge,
            rhs: 1.0,
        })
        .collect();
    let sol = lp::solve(&Lp { c: costs.clone(), rows, maximize: false })
        .map_err(|e| Error::Numeric(format!("weighted content LP: {e}")))?;
    Ok(WeightedCover {
        s,
        delta,
        tau,
        family,
        value: sol.value,
        blocks,
        costs,
        weights: sol.x,
        dual: sol.duals.iter().map(|v| v.max(0.0)).collect(),
        pivots: sol.pivots,
    })
}

/// Scaling-law measure from the covering LP dual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanCertificate {
    pub s: f64,
    pub delta: f64,
    pub tau: f64,
    pub family: Family,
    pub measure: Vec<f64>,
    pub mass: f64,
    pub lp_value: f64,
    pub gap: f64,
    /// `min_E (τ + diam E)^s − μ(E)` over the candidate blocks.
    pub worst_slack: f64,
    pub valid: bool,
}

impl FrostmanCertificate {
    /// The measure scaled to total mass one (the scaling law then holds with
    /// constant `1/mass`).
    pub fn normalized(&self) -> Result<Vec<f64>> {
        if !(self.mass > 0.0) {
            return precondition("Frostman measure has zero mass and cannot be normalized");
        }
        Ok(self.measure.iter().map(|m| m / self.mass).collect())
    }
}

/// `max Σ μ(x)` subject to `μ(E) ≤ (τ + diam E)^s` for every candidate block.
pub fn frostman_measure(
    space: &FiniteMetricSpace,
    s: f64,
    delta: f64,
    tau: f64,
    family: Family,
    budget: &Budget,
) -> Result<FrostmanCertificate> {
    let wc = weighted_content(space, s, delta, tau, family, budget)?;
    let mass: f64 = wc.dual.iter().sum();
    let worst_slack = wc
        .blocks
        .iter()
        .zip(&wc.costs)
        .map(|(b, c)| c - b.iter().map(|&x| wc.dual[x]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let gap = (mass - wc.value).abs();
    let cert = FrostmanCertificate {
        s,
        delta,
        tau,
        family,
        measure: wc.dual,
        mass,
        lp_value: wc.value,
        gap,
        worst_slack,
        valid: gap <= CERT_TOL * (1.0 + wc.value.abs()) && worst_slack >= -CERT_TOL,
    };
    if !cert.valid {
        return Err(Error::Numeric(format!(
            "Frostman certificate breaches tolerance: gap {gap:.3e}, worst slack {worst_slack:.3e}"
        )));
    }
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub family: Family,
    pub blocks_checked: usize,
    /// `min_E (τ + diam E)^s − μ(E)`; negative means a violation.
    pub worst_margin: f64,
    pub witness: Vec<usize>,
    pub pass: bool,
}

/// Checks `μ(E) ≤ (τ + diam E)^s` over every family block of diameter `< δ`.
pub fn verify_scaling_law(
    space: &FiniteMetricSpace,
    measure: &[f64],
    s: f64,
    delta: f64,
    tau: f64,
    family: Family,
    budget: &Budget,
) -> Result<ScalingReport> {
    check_query(s, delta, tau)?;
    if measure.len() != space.len() {
        return invalid(format!("measure has {} entries for {} points", measure.len(), space.len()));
    }
    let blocks = candidate_blocks(space, delta, family, budget)?;
    let mut worst = f64::INFINITY;
    let mut witness = Vec::new();
    for b in &blocks {
        let m = block_cost(space.block_diameter(b), s, tau) - b.iter().map(|&x| measure[x]).sum::<f64>();
        if m < worst {
            worst = m;
            witness = b.clone();
        }
    }
    Ok(ScalingReport { family, blocks_checked: blocks.len(), worst_margin: worst, witness, pass: worst >= -CERT_TOL })
}

/// `sup{s : H^s_ε ≥ 1}` with the coarse offset `τ`, by bisection on `[0, 64]`.
///
/// Content is decreasing in `s` once every admissible block has
/// `τ + diam ≤ 1`, which holds when `τ + min(ε, diam X) ≤ 1`.
pub fn dim_profile(space: &FiniteMetricSpace, eps: f64, tau: f64, mode: Mode, budget: &Budget) -> Result<f64> {
    check_query(0.0, eps, tau)?;
    if !(eps > tau) {
        return precondition(format!("scale ε = {eps} must exceed the offset τ = {tau}"));
    }
    let reach = eps.min(space.diameter());
    if tau + reach > 1.0 + 1e-12 {
        return precondition(format!(
            "τ + min(ε, diam) = {} exceeds 1, so content is not monotone in s; rescale the metric",
            tau + reach
        ));
    }
    let content = |s: f64| hausdorff_content(space, s, eps, tau, mode, budget).map(|r| r.0);
    if content(0.0)? < 1.0 {
        return Ok(0.0);
    }
    if content(S_MAX)? >= 1.0 {
        return Ok(S_MAX);
    }
    let (mut lo, mut hi) = (0.0, S_MAX);
    while hi - lo > S_TOL {
        let mid = 0.5 * (lo + hi);
        if content(mid)? >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanHausdorffSample {
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub dim: f64,
    /// `dim / N`.
    pub per_symbol: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanHausdorffEstimate {
    pub kind: OrbitKind,
    pub tau: f64,
    pub samples: Vec<MeanHausdorffSample>,
    /// Per ε, the largest `dim/N` over the block lengths.
    pub plateau: Vec<(f64, f64)>,
    /// Slope of the plateau against `log₂(1/ε)`, when the grid allows a fit.
    pub trend: Option<DimensionEstimate>,
    pub truncation_error: f64,
}

/// `dim_H(X, d_N, ε)/N` over a grid, with `d_N` the max or average orbit
/// metric. Exact content is used within the point budget, greedy above it.
pub fn mean_hausdorff_estimate(
    sys: &SystemSpec,
    eps: &[f64],
    ns: &[usize],
    tau: f64,
    kind: OrbitKind,
    budget: &Budget,
) -> Result<MeanHausdorffEstimate> {
    if eps.is_empty() || ns.is_empty() {
        return invalid("ε and N grids must be nonempty");
    }
    let mut samples = Vec::new();
    for &n in ns {
        let (space, _) = orbit_metric(sys, n, kind, budget)?;
        let mode = if space.len() <= budget.exact_points { Mode::Exact } else { Mode::Greedy };
        for &e in eps {
            let dim = dim_profile(&space, e, tau, mode, budget)?;
            samples.push(MeanHausdorffSample { epsilon: e, n, dim, per_symbol: dim / n as f64, mode });
        }
    }
    let plateau: Vec<(f64, f64)> = eps
        .iter()
        .map(|&e| {
            let v = samples.iter().filter(|s| s.epsilon == e).map(|s| s.per_symbol).fold(0.0, f64::max);
            (e, v)
        })
        .collect();
    let trend = fit_slope(
        &plateau.iter().map(|p| p.0).collect::<Vec<_>>(),
        &plateau.iter().map(|p| p.1).collect::<Vec<_>>(),
        Weighting::default(),
    )
    .ok();
    Ok(MeanHausdorffEstimate { kind, tau, samples, plateau, trend, truncation_error: sys.truncation_error() })
}
