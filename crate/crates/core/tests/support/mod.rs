//! Independent oracles and random instance generators shared by the
//! integration tests. Nothing here calls the solvers it is used to check.

#![allow(dead_code)]

use meandim::FiniteMetricSpace;
use rand::Rng;

/// Random finite metric space: Euclidean points in `[0,1]^dim`, or shortest
/// paths of a random weighted graph (which produces many distance ties).
pub fn random_space<R: Rng>(rng: &mut R, n: usize) -> FiniteMetricSpace {
    if rng.gen_bool(0.5) {
        let dim = rng.gen_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
                    .collect()
            })
            .collect();
        FiniteMetricSpace::from_matrix("euclid", dist).unwrap()
    } else {
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || rng.gen_bool(0.3) {
                    let w = rng.gen_range(1..=4) as f64 / 4.0;
                    d[i][j] = w;
                    d[j][i] = w;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        FiniteMetricSpace::from_matrix("graph", d).unwrap()
    }
}

fn mask_diam(space: &FiniteMetricSpace, mask: u32) -> f64 {
    let idx: Vec<usize> = (0..space.len()).filter(|i| mask >> i & 1 == 1).collect();
    let mut m: f64 = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            m = m.max(space.dist[i][j]);
        }
    }
    m
}

pub fn all_diameters(space: &FiniteMetricSpace) -> Vec<f64> {
    (0..1u32 << space.len()).map(|m| mask_diam(space, m)).collect()
}

/// Minimum over partitions into blocks with `diam < eps` of `Σ cost(diam)`,
/// by dynamic programming over subsets.
pub fn partition_min(space: &FiniteMetricSpace, eps: f64, cost: impl Fn(f64) -> f64) -> f64 {
    let n = space.len();
    let full = (1u32 << n) - 1;
    let diam = all_diameters(space);
    let mut best = vec![f64::INFINITY; 1 << n];
    best[0] = 0.0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        // Enumerate blocks containing the lowest point.
        let mut sub = rest;
        loop {
            let block = sub | low;
            if diam[block as usize] < eps - 1e-12 {
                let v = best[(mask ^ block) as usize] + cost(diam[block as usize]);
                if v < best[mask as usize] {
                    best[mask as usize] = v;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    best[full as usize]
}

pub fn brute_covering(space: &FiniteMetricSpace, eps: f64) -> usize {
    partition_min(space, eps, |_| 1.0) as usize
}

/// Largest subset with pairwise distance `≥ eps`.
pub fn brute_separating(space: &FiniteMetricSpace, eps: f64) -> usize {
    let n = space.len();
    let mut best = 0;
    'outer: for mask in 0u32..1 << n {
        let c = mask.count_ones() as usize;
        if c <= best {
            continue;
        }
        for i in 0..n {
            for j in i + 1..n {
                if mask >> i & 1 == 1 && mask >> j & 1 == 1 && space.dist[i][j] < eps - 1e-12 {
                    continue 'outer;
                }
            }
        }
        best = c;
    }
    best
}

pub fn brute_content(space: &FiniteMetricSpace, s: f64, eps: f64, tau: f64) -> f64 {
    partition_min(space, eps, |d| {
        let b: f64 = tau + d;
        if s == 0.0 {
            1.0
        } else {
            b.powf(s)
        }
    })
}

pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.log2()).sum::<f64>()
}

/// `H(X) + H(Y) − H(X,Y)`.
pub fn mi_from_entropies(joint: &[Vec<f64>]) -> f64 {
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..joint[0].len()).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let flat: Vec<f64> = joint.iter().flatten().copied().collect();
    entropy(&px) + entropy(&py) - entropy(&flat)
}

pub fn random_simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

pub fn random_channel<R: Rng>(rng: &mut R, nx: usize, ny: usize) -> Vec<Vec<f64>> {
    (0..nx).map(|_| random_simplex(rng, ny)).collect()
}

pub fn joint_of(p: &[f64], k: &[Vec<f64>]) -> Vec<Vec<f64>> {
    p.iter().zip(k).map(|(&px, row)| row.iter().map(|v| px * v).collect()).collect()
}

/// `R_q(D) = max_{a≥0} [−aD − Σ_x p(x) log₂ Σ_y q(y) 2^{−a d(x,y)}]`, the
/// minimum of `D(W‖q|p)` over channels with `E d ≤ D`. Concave in `a`.
fn rate_for_output(p: &[f64], d: &[Vec<f64>], q: &[f64], target: f64) -> f64 {
    let g = |a: f64| {
        -a * target
            - p.iter()
                .zip(d)
                .filter(|(px, _)| **px > 0.0)
                .map(|(px, row)| px * row.iter().zip(q).map(|(dv, qv)| qv * (-a * dv).exp2()).sum::<f64>().log2())
                .sum::<f64>()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while g(2.0 * hi) > g(hi) && hi < 1e6 {
        hi *= 2.0;
    }
    hi *= 2.0;
    for _ in 0..90 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if g(m1) < g(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    g(0.5 * (lo + hi)).max(0.0)
}

fn simplex_grid(dim: usize, steps: usize) -> Vec<Vec<usize>> {
    if dim == 1 {
        return vec![vec![steps]];
    }
    let mut out = Vec::new();
    for first in 0..=steps {
        for mut rest in simplex_grid(dim - 1, steps - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `R(D) = min_q R_q(D)` by a refining grid over output distributions `q`.
/// `R_q` is convex in `q`, so zooming in on the best grid cell converges.
pub fn rd_grid_oracle(p: &[f64], d: &[Vec<f64>], target: f64) -> f64 {
    let ny = d[0].len();
    let steps = 12;
    let mut centre = vec![1.0 / ny as f64; ny];
    let mut radius = 1.0;
    let mut best = f64::INFINITY;
    for _ in 0..24 {
        let mut round_best = (f64::INFINITY, centre.clone());
        for g in simplex_grid(ny, steps) {
            // Map the unit grid into a box of the current radius around the centre.
            let raw: Vec<f64> = g
                .iter()
                .zip(&centre)
                .map(|(&k, &c)| (c + radius * (k as f64 / steps as f64 - 1.0 / ny as f64)).max(0.0))
                .collect();
            let s: f64 = raw.iter().sum();
            if s <= 0.0 {
                continue;
            }
            let q: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let r = rate_for_output(p, d, &q, target);
            if r < round_best.0 {
                round_best = (r, q);
            }
        }
        best = best.min(round_best.0);
        centre = round_best.1;
        radius *= 0.5;
    }
    best
}

/// Index of the site nearest to `(u, 0)` among sites `(a, h_a)`.
pub fn nearest_site(sites: &[(i64, f64)], u: f64) -> (i64, f64) {
    sites
        .iter()
        .map(|&(a, h)| (a, ((u - a as f64).powi(2) + h * h).sqrt()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
}
