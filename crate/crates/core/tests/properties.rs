mod support;

use meandim::algebraic::{projection_dim, rank, AlgebraicActionSpec};
use meandim::ergodic::{cylinder_distance, optimal_coupling, pushforward_average};
use meandim::hausdorff::{hausdorff_content, weighted_content, Family};
use meandim::info::{mutual_information, DiscreteDistribution, JointDistribution};
use meandim::lp::{solve, Cmp, Lp, Row};
use meandim::measure::{MeasureOnSystem, Provenance};
use meandim::metric::{covering_number, separating_number, tame_transform, validate_metric, Mode};
use meandim::systems::{orbit_metric, OrbitKind};
use meandim::tiling::{tile, MarkerTrace};
use meandim::{build_full_shift, Alphabet, Budget, FiniteMetricSpace, Policy, SystemSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

fn space(seed: u64, n: usize) -> FiniteMetricSpace {
    random_space(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sandwich_and_greedy_bounds(seed in any::<u64>(), n in 1usize..=10, frac in 0.01f64..1.3, shrink in 0.01f64..0.99) {
        let b = Budget::default();
        let sp = space(seed, n);
        let eps = frac * sp.diameter().max(1e-3);
        let delta = eps / 2.0 * shrink;
        let (se, _) = separating_number(&sp, eps, Mode::Exact, &b).unwrap();
        let (ce, cover) = covering_number(&sp, eps, Mode::Exact, &b).unwrap();
        let (sd, _) = separating_number(&sp, delta, Mode::Exact, &b).unwrap();
        prop_assert!(se <= ce && ce <= sd);
        prop_assert!(cover.diameters.iter().all(|&d| d < eps));
        let (cg, _) = covering_number(&sp, eps, Mode::Greedy, &b).unwrap();
        let (sg, _) = separating_number(&sp, eps, Mode::Greedy, &b).unwrap();
        prop_assert!(cg >= ce && sg <= se);
    }

    #[test]
    fn tame_transform_is_a_smaller_metric(seed in any::<u64>(), n in 1usize..=9) {
        let sp = space(seed, n);
        let t = tame_transform(&sp).unwrap();
        prop_assert!(validate_metric(&t).unwrap().is_empty());
        for i in 0..n {
            for j in 0..n {
                prop_assert!(t.dist[i][j] <= sp.dist[i][j] + 1e-12);
            }
        }
    }

    #[test]
    fn mi_bounds_and_identity(seed in any::<u64>(), nx in 1usize..6, ny in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = joint_of(&random_simplex(&mut rng, nx), &random_channel(&mut rng, nx, ny));
        let px: Vec<f64> = j.iter().map(|r| r.iter().sum()).collect();
        let py: Vec<f64> = (0..ny).map(|c| j.iter().map(|r| r[c]).sum()).collect();
        let i = mutual_information(&JointDistribution::new(j.clone()).unwrap()).unwrap();
        prop_assert!(i >= 0.0 && i <= entropy(&px).min(entropy(&py)) + 1e-9);
        prop_assert!((i - mi_from_entropies(&j)).abs() < 1e-9);
    }

    #[test]
    fn lp_strong_duality(seed in any::<u64>(), m in 1usize..5, k in 1usize..6) {
        // min c·x, A x ≥ 1 with A ≥ 0 having no zero row: feasible and bounded.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let rows: Vec<Row> = (0..m).map(|_| {
            let mut coef: Vec<f64> = (0..k).map(|_| if rng.gen_bool(0.6) { rng.gen_range(0.1..2.0) } else { 0.0 }).collect();
            coef[rng.gen_range(0..k)] = rng.gen_range(0.5..2.0);
            Row { coef, cmp: Cmp::Ge, rhs: 1.0 }
        }).collect();
        let c: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..3.0)).collect();
        let sol = solve(&Lp { c: c.clone(), rows: rows.clone(), maximize: false }).unwrap();
        let dual_value: f64 = sol.duals.iter().sum();
        prop_assert!((dual_value - sol.value).abs() <= 1e-9 * (1.0 + sol.value.abs()));
        prop_assert!(sol.duals.iter().all(|&y| y >= -1e-12));
        for (j, cj) in c.iter().enumerate() {
            let reduced: f64 = rows.iter().zip(&sol.duals).map(|(r, y)| r.coef[j] * y).sum();
            prop_assert!(reduced <= cj + 1e-9);
        }
        for r in &rows {
            prop_assert!(r.coef.iter().zip(&sol.x).map(|(a, x)| a * x).sum::<f64>() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn weighted_below_content_and_balls_above_subsets(seed in any::<u64>(), n in 1usize..=9, s in 0.0f64..2.0, tau in 0.0f64..0.3, frac in 0.1f64..1.5) {
        let b = Budget::default();
        let sp = space(seed, n);
        let delta = frac * sp.diameter().max(1e-3);
        let all = weighted_content(&sp, s, delta, tau, Family::AllSubsets, &b).unwrap().value;
        let balls = weighted_content(&sp, s, delta, tau, Family::Balls, &b).unwrap().value;
        let (h, _) = hausdorff_content(&sp, s, delta, tau, Mode::Exact, &b).unwrap();
        prop_assert!(all <= h * (1.0 + 1e-9) + 1e-12);
        prop_assert!(balls >= all * (1.0 - 1e-9) - 1e-12);
        prop_assert!((h - brute_content(&sp, s, delta, tau)).abs() <= 1e-9 * (1.0 + h));
    }

    #[test]
    fn content_monotone(seed in any::<u64>(), n in 2usize..=8, s in 0.1f64..2.0, ds in 0.05f64..1.0, tau in 0.01f64..0.3) {
        let b = Budget::default();
        let mut sp = space(seed, n);
        // Scale so τ + diam ≤ 1 and blocks have positive coarse diameter.
        let f = (1.0 - tau) / sp.diameter().max(1e-9) * 0.99;
        sp = sp.scaled(f);
        let eps = 1.0;
        let (h1, _) = hausdorff_content(&sp, s, eps, tau, Mode::Exact, &b).unwrap();
        let (h2, _) = hausdorff_content(&sp, s + ds, eps, tau, Mode::Exact, &b).unwrap();
        prop_assert!(h2 < h1);
        let (h3, _) = hausdorff_content(&sp, s, eps / 2.0, tau, Mode::Exact, &b).unwrap();
        prop_assert!(h1 <= h3 + 1e-12);
    }

    #[test]
    fn coupling_marginals_and_optimality(seed in any::<u64>(), n in 1usize..5, m in 1usize..5) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = random_simplex(&mut rng, n);
        let nu = random_simplex(&mut rng, m);
        let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen::<f64>()).collect()).collect();
        let c = optimal_coupling(&DiscreteDistribution::new(mu.clone()).unwrap(), &DiscreteDistribution::new(nu.clone()).unwrap(), &cost).unwrap();
        for (a, b) in c.row_marginal.iter().zip(&mu) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in c.col_marginal.iter().zip(&nu) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        // The product coupling is feasible.
        let product: f64 = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| mu[i] * nu[j] * cost[i][j]).sum();
        prop_assert!(c.cost <= product + 1e-12);
    }

    #[test]
    fn tiling_cells_partition_and_contain(seed in any::<u64>(), len in 30usize..120) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.4) { rng.gen_range(0.1..=1.0) } else { 0.0 }).collect();
        values[len / 2] = 1.0;
        let x = MarkerTrace { start: -(len as i64) / 2, values };
        let t = tile(&x).unwrap();
        let cells: Vec<(i64, (f64, f64))> = t.intervals.iter().map(|(&a, &c)| (a, c)).collect();
        for w in cells.windows(2) {
            // Consecutive nonempty cells share their endpoint.
            prop_assert!((w[0].1 .1 - w[1].1 .0).abs() <= 1e-9);
        }
        for &(a, (l, r)) in &cells {
            prop_assert!(l <= r);
            let h = 1.0 / x.values[(a - x.start) as usize];
            // A point u of cell a is no farther from site a than from any site;
            // in particular |u − a| ≤ margin.
            prop_assert!((a as f64 - l).max(r - a as f64) <= (t.margin.powi(2) - h * h).max(0.0).sqrt() + 1e-9);
        }
    }

    #[test]
    fn tiling_continuity(seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = 80;
        let mut values: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.4) { rng.gen_range(0.2..=0.9) } else { 0.0 }).collect();
        values[len / 2] = 0.9;
        let x = MarkerTrace { start: -40, values: values.clone() };
        let y = MarkerTrace { start: -40, values: values.iter().map(|&v| if v > 0.0 { v + rng.gen_range(-1e-6..1e-6) } else { 0.0 }).collect() };
        let (tx, ty) = (tile(&x).unwrap(), tile(&y).unwrap());
        for (a, &(l, r)) in &tx.intervals {
            if let Some(&(l2, r2)) = ty.intervals.get(a) {
                // Nondegenerate: skip cells that are nearly empty.
                if r - l > 1e-3 {
                    prop_assert!((l - l2).abs() <= 1e-3 && (r - r2).abs() <= 1e-3);
                }
            }
        }
    }

    #[test]
    fn content_scaling_law(seed in any::<u64>(), n in 1usize..=8, s in 0.1f64..2.0, frac in 0.1f64..1.5, tau in 0.0f64..0.2, c in 0.2f64..4.0) {
        let b = Budget::default();
        let sp = space(seed, n);
        let eps = frac * sp.diameter().max(1e-3);
        let (h, _) = hausdorff_content(&sp, s, eps, tau, Mode::Exact, &b).unwrap();
        let (hc, _) = hausdorff_content(&sp.scaled(c), s, c * eps, c * tau, Mode::Exact, &b).unwrap();
        prop_assert!((hc - c.powf(s) * h).abs() <= 1e-9 * (1.0 + hc));
    }

    #[test]
    fn truncation_and_shift_lipschitz(seed in any::<u64>(), w in 0usize..4, levels in 2usize..5) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = SystemSpec { alphabet: Alphabet::QuantizedInterval { levels }, window: w, policy: Policy::Exhaustive, transform: None, constraint: None };
        // Finitely supported differences on coordinates −m..=m, equal outside.
        let m = w as i64 + 3;
        let len = (2 * m + 1) as usize;
        let x: Vec<u32> = (0..len).map(|_| rng.gen_range(0..levels as u32)).collect();
        let y: Vec<u32> = (0..len).map(|_| rng.gen_range(0..levels as u32)).collect();
        let rho = |a: u32, b: u32| sys.alphabet.rho(a as usize, b as usize);
        let d_inf = |shift: i64| -> f64 {
            (-m..=m).map(|t| {
                let n = t - shift;
                0.5f64.powi(n.unsigned_abs() as i32) * rho(x[(t + m) as usize], y[(t + m) as usize])
            }).sum()
        };
        let centre = |v: &[u32]| v[(m - w as i64) as usize..=(m + w as i64) as usize].to_vec();
        let d_w = sys.distance(&centre(&x), &centre(&y));
        prop_assert!((d_w - d_inf(0)).abs() <= sys.truncation_error() + 1e-12);
        // d(σx, σy) reads coordinate n+1 at weight 2^{-|n|}.
        prop_assert!(d_inf(1) <= 2.0 * d_inf(0) + 1e-12);
    }

    #[test]
    fn rank_subadditive_and_exact(seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rng.gen_range(1..=2);
        let a = rng.gen_range(1..=3);
        let rows = rng.gen_range(0..=2);
        let m: Vec<Vec<i64>> = (0..rows).map(|_| (0..r * a).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        let spec = AlgebraicActionSpec { r, a, m, q: 4, window: 1 };
        let dims: Vec<usize> = (a..a + 6).map(|n| projection_dim(&spec, n).unwrap().dim).collect();
        for i in 0..dims.len() {
            for j in 0..dims.len() {
                let (mi, ni) = (a + i, a + j);
                if mi + ni < a + dims.len() {
                    prop_assert!(dims[mi + ni - a] <= dims[i] + dims[j]);
                }
            }
        }
        let stack = spec.stacked(a + 3);
        // Rank equals the real rank: compare with an f64 elimination.
        let mut f: Vec<Vec<f64>> = stack.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let cols = f.first().map_or(0, |r| r.len());
        let mut rk = 0;
        for c in 0..cols {
            let Some(p) = (rk..f.len()).max_by(|&i, &j| f[i][c].abs().total_cmp(&f[j][c].abs())) else { break };
            if f[p][c].abs() < 1e-9 { continue; }
            f.swap(rk, p);
            for i in rk + 1..f.len() {
                let k = f[i][c] / f[rk][c];
                for j in c..cols { f[i][j] -= k * f[rk][j]; }
            }
            rk += 1;
        }
        prop_assert_eq!(rank(&stack), rk);
    }
}

#[test]
fn orbit_metrics_are_ordered() {
    let b = Budget::default();
    let sys = build_full_shift(Alphabet::QuantizedInterval { levels: 3 }, 1, Policy::Exhaustive, &b).unwrap();
    for n in 1..=2 {
        let (dmax, words) = orbit_metric(&sys, n, OrbitKind::Max, &b).unwrap();
        let (davg, _) = orbit_metric(&sys, n, OrbitKind::Avg, &b).unwrap();
        let (dnext, words_next) = orbit_metric(&sys, n + 1, OrbitKind::Max, &b).unwrap();
        for i in 0..words.len() {
            for j in 0..words.len() {
                assert!(davg.dist[i][j] <= dmax.dist[i][j] + 1e-15);
            }
        }
        // Extensions of a pair by one more letter can only increase d_N.
        for (i, wi) in words_next.iter().enumerate() {
            for (j, wj) in words_next.iter().enumerate() {
                let a = words.iter().position(|w| w[..] == wi[..wi.len() - 1]).unwrap();
                let c = words.iter().position(|w| w[..] == wj[..wj.len() - 1]).unwrap();
                assert!(dmax.dist[a][c] <= dnext.dist[i][j] + 1e-15);
            }
        }
    }
}

#[test]
fn averaging_approaches_invariance() {
    let b = Budget::default();
    let sys = build_full_shift(Alphabet::QuantizedInterval { levels: 2 }, 1, Policy::Exhaustive, &b).unwrap();
    // A point mass on a non-periodic word: averaging spreads it along the orbit.
    let len = 24;
    let word: Vec<u32> = (0..len).map(|i| u32::from((i * i + 1) % 5 < 2)).collect();
    let nu = MeasureOnSystem { words: vec![word], mass: vec![1.0], provenance: Provenance::Custom };
    let mut defects = Vec::new();
    for n in [1, 2, 4, 8] {
        let avg = pushforward_average(&nu, n).unwrap().measure;
        avg.validate().unwrap();
        let shifted = pushforward_average(&avg, 2).unwrap().measure;
        defects.push(cylinder_distance(&avg, &shifted, sys.window, 3).unwrap());
    }
    for w in defects.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{defects:?}");
    }
}
