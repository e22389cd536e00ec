//! Finite metric spaces, covers, covering and separating numbers, and the
//! taming transform.

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{invalid, Result};

/// Absolute slack used when deciding `diam < ε` and `d ≥ ε`.
pub const DIAM_TOL: f64 = 1e-12;

/// `d` counts as strictly below `eps`.
#[inline]
pub fn below(d: f64, eps: f64) -> bool {
    d < eps - DIAM_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    pub label: String,
    pub points: Vec<String>,
    pub dist: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Greedy,
}

/// A cover by point-index blocks with their diameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub blocks: Vec<Vec<usize>>,
    pub diameters: Vec<f64>,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// A violated metric axiom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NonzeroDiagonal { i: usize, value: f64 },
    Negative { i: usize, j: usize, value: f64 },
    Asymmetric { i: usize, j: usize },
    NotDistinct { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
}

impl FiniteMetricSpace {
    /// Builds a space after a structural (shape) check only.
    pub fn new(label: impl Into<String>, points: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let s = FiniteMetricSpace {
            label: label.into(),
            points,
            dist,
        };
        s.check_shape()?;
        Ok(s)
    }

    /// Points named by their index.
    pub fn from_matrix(label: impl Into<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let points = (0..dist.len()).map(|i| i.to_string()).collect();
        Self::new(label, points, dist)
    }

    /// Space of reals under `|x - y|`.
    pub fn from_reals(label: impl Into<String>, values: &[f64]) -> Self {
        let dist = values
            .iter()
            .map(|a| values.iter().map(|b| (a - b).abs()).collect())
            .collect();
        FiniteMetricSpace {
            label: label.into(),
            points: values.iter().map(|v| format!("{v}")).collect(),
            dist,
        }
    }

    pub fn check_shape(&self) -> Result<()> {
        let n = self.points.len();
        if self.dist.len() != n {
            return invalid(format!("distance matrix has {} rows for {} points", self.dist.len(), n));
        }
        for (i, row) in self.dist.iter().enumerate() {
            if row.len() != n {
                return invalid(format!("row {i} has {} entries, expected {n}", row.len()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return invalid(format!("row {i} has a non-finite entry"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn diameter(&self) -> f64 {
        self.dist
            .iter()
            .flat_map(|r| r.iter().copied())
            .fold(0.0, f64::max)
    }

    /// Max pairwise distance within a block.
    pub fn block_diameter(&self, block: &[usize]) -> f64 {
        let mut m = 0.0f64;
        for (a, &i) in block.iter().enumerate() {
            for &j in &block[a + 1..] {
                m = m.max(self.dist[i][j]);
            }
        }
        m
    }

    /// Same space with all distances multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        FiniteMetricSpace {
            label: self.label.clone(),
            points: self.points.clone(),
            dist: self
                .dist
                .iter()
                .map(|r| r.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }

    /// Induced subspace on the given indices.
    pub fn subspace(&self, idx: &[usize]) -> Self {
        FiniteMetricSpace {
            label: self.label.clone(),
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
            dist: idx
                .iter()
                .map(|&i| idx.iter().map(|&j| self.dist[i][j]).collect())
                .collect(),
        }
    }

    fn cover_from_blocks(&self, blocks: Vec<Vec<usize>>) -> Cover {
        let diameters = blocks.iter().map(|b| self.block_diameter(b)).collect();
        Cover { blocks, diameters }
    }
}

/// Lists every violated metric axiom; empty iff `space` is a metric space.
pub fn validate_metric(space: &FiniteMetricSpace) -> Result<Vec<Violation>> {
    space.check_shape()?;
    let n = space.len();
    let d = &space.dist;
    let mut out = Vec::new();
    for i in 0..n {
        if d[i][i] != 0.0 {
            out.push(Violation::NonzeroDiagonal { i, value: d[i][i] });
        }
        for j in 0..n {
            if d[i][j] < 0.0 {
                out.push(Violation::Negative { i, j, value: d[i][j] });
            }
            if i < j {
                if d[i][j] != d[j][i] {
                    out.push(Violation::Asymmetric { i, j });
                }
                if d[i][j] <= 0.0 {
                    out.push(Violation::NotDistinct { i, j });
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let excess = d[i][j] - d[i][k] - d[k][j];
                if excess > DIAM_TOL {
                    out.push(Violation::Triangle { i, j, k, excess });
                }
            }
        }
    }
    Ok(out)
}

/// Adjacency of the `d < ε` graph as bitsets.
fn proximity(space: &FiniteMetricSpace, eps: f64) -> Vec<Vec<bool>> {
    let n = space.len();
    (0..n)
        .map(|i| (0..n).map(|j| i != j && below(space.d(i, j), eps)).collect())
        .collect()
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return invalid(format!("epsilon must be positive and finite, got {eps}"));
    }
    Ok(())
}

/// Minimum number of blocks of diameter `< ε` covering the space, with a witness.
pub fn covering_number(
    space: &FiniteMetricSpace,
    eps: f64,
    mode: Mode,
    budget: &Budget,
) -> Result<(usize, Cover)> {
    check_eps(eps)?;
    if space.is_empty() {
        return Ok((0, Cover { blocks: vec![], diameters: vec![] }));
    }
    let blocks = match mode {
        Mode::Exact => {
            budget.check_exact("covering_number", space.len())?;
            exact_clique_cover(&proximity(space, eps))
        }
        Mode::Greedy => greedy_cover(space, eps),
    };
    Ok((blocks.len(), space.cover_from_blocks(blocks)))
}

/// Branch-and-bound minimum clique cover of the proximity graph. Blocks only
/// ever grow by points adjacent to every member, so each block is a clique.
fn exact_clique_cover(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    // Fewest neighbours first: the hardest points get placed early.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| adj[i].iter().filter(|&&b| b).count());

    struct Search<'a> {
        adj: &'a [Vec<bool>],
        order: Vec<usize>,
        blocks: Vec<Vec<usize>>,
        best: Vec<Vec<usize>>,
    }
    impl Search<'_> {
        fn go(&mut self, pos: usize) {
            if self.blocks.len() >= self.best.len() {
                return;
            }
            if pos == self.order.len() {
                self.best = self.blocks.clone();
                return;
            }
            let v = self.order[pos];
            for b in 0..self.blocks.len() {
                if self.blocks[b].iter().all(|&u| self.adj[v][u]) {
                    self.blocks[b].push(v);
                    self.go(pos + 1);
                    self.blocks[b].pop();
                }
            }
            self.blocks.push(vec![v]);
            self.go(pos + 1);
            self.blocks.pop();
        }
    }

    let singletons: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut s = Search {
        adj,
        order,
        blocks: Vec::new(),
        best: singletons,
    };
    // Seed with the greedy bound so pruning starts tight.
    let seed = greedy_clique_cover(adj);
    if seed.len() < s.best.len() {
        s.best = seed;
    }
    s.go(0);
    let mut best = s.best;
    for b in &mut best {
        b.sort_unstable();
    }
    best.sort();
    best
}

fn greedy_clique_cover(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut covered = vec![false; n];
    let mut blocks = Vec::new();
    while let Some(_) = covered.iter().position(|c| !c) {
        let mut best: Vec<usize> = Vec::new();
        for seed in (0..n).filter(|&i| !covered[i]) {
            let mut block = vec![seed];
            for v in (0..n).filter(|&v| !covered[v] && v != seed) {
                if block.iter().all(|&u| adj[v][u]) {
                    block.push(v);
                }
            }
            if block.len() > best.len() {
                best = block;
            }
        }
        for &v in &best {
            covered[v] = true;
        }
        best.sort_unstable();
        blocks.push(best);
    }
    blocks
}

/// Largest-first greedy: from every uncovered seed grow a block by nearest
/// compatible uncovered points, keep the largest, repeat.
fn greedy_cover(space: &FiniteMetricSpace, eps: f64) -> Vec<Vec<usize>> {
    let n = space.len();
    let mut covered = vec![false; n];
    let mut left = n;
    let mut blocks = Vec::new();
    while left > 0 {
        let mut best: Vec<usize> = Vec::new();
        for seed in (0..n).filter(|&i| !covered[i]) {
            let mut cand: Vec<usize> = (0..n)
                .filter(|&v| !covered[v] && v != seed && below(space.d(seed, v), eps))
                .collect();
            cand.sort_by(|&a, &b| space.d(seed, a).total_cmp(&space.d(seed, b)));
            let mut block = vec![seed];
            for v in cand {
                if block.iter().all(|&u| below(space.d(u, v), eps)) {
                    block.push(v);
                }
            }
            if block.len() > best.len() {
                best = block;
            }
        }
        for &v in &best {
            covered[v] = true;
        }
        left -= best.len();
        best.sort_unstable();
        blocks.push(best);
    }
    blocks
}

/// Largest `ε`-separated subset (pairwise `d ≥ ε`), with a witness.
pub fn separating_number(
    space: &FiniteMetricSpace,
    eps: f64,
    mode: Mode,
    budget: &Budget,
) -> Result<(usize, Vec<usize>)> {
    check_eps(eps)?;
    let adj = proximity(space, eps);
    let set = match mode {
        Mode::Exact => {
            budget.check_exact("separating_number", space.len())?;
            exact_independent_set(&adj)
        }
        Mode::Greedy => greedy_independent_set(&adj),
    };
    Ok((set.len(), set))
}

fn greedy_independent_set(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let mut alive = vec![true; n];
    let mut out = Vec::new();
    loop {
        let pick = (0..n).filter(|&i| alive[i]).min_by_key(|&i| {
            (0..n).filter(|&j| alive[j] && adj[i][j]).count()
        });
        let Some(v) = pick else { break };
        out.push(v);
        alive[v] = false;
        for j in 0..n {
            if adj[v][j] {
                alive[j] = false;
            }
        }
    }
    out.sort_unstable();
    out
}

fn exact_independent_set(adj: &[Vec<bool>]) -> Vec<usize> {
    fn go(adj: &[Vec<bool>], cand: Vec<usize>, cur: &mut Vec<usize>, best: &mut Vec<usize>) {
        if cur.len() + cand.len() <= best.len() {
            return;
        }
        let Some((&v, rest)) = cand.split_first() else {
            *best = cur.clone();
            return;
        };
        // Take v.
        let without_nbrs: Vec<usize> = rest.iter().copied().filter(|&u| !adj[v][u]).collect();
        cur.push(v);
        go(adj, without_nbrs, cur, best);
        cur.pop();
        // Skip v; only useful if v has a neighbour among the candidates.
        if rest.iter().any(|&u| adj[v][u]) {
            go(adj, rest.to_vec(), cur, best);
        }
    }
    let mut best = greedy_independent_set(adj);
    let mut cur = Vec::new();
    go(adj, (0..adj.len()).collect(), &mut cur, &mut best);
    best.sort_unstable();
    best
}

/// Landmark metric `d'(x,y) = Σ_i 2^{-i} |d(x,x_i) - d(y,x_i)|`, every point a
/// landmark in input order.
pub fn tame_transform(space: &FiniteMetricSpace) -> Result<FiniteMetricSpace> {
    space.check_shape()?;
    let n = space.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let mut s = 0.0;
            let mut w = 0.5;
            for l in 0..n {
                s += w * (space.d(i, l) - space.d(j, l)).abs();
                w *= 0.5;
            }
            dist[i][j] = s;
            dist[j][i] = s;
        }
    }
    Ok(FiniteMetricSpace {
        label: format!("{} (tamed)", space.label),
        points: space.points.clone(),
        dist,
    })
}
