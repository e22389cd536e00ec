use meandim::measure::{MeasureOnSystem, Provenance};
use meandim::ratedist::{dynamical_rd, product_rd};
use meandim::{build_full_shift, Alphabet, Budget, Policy};

#[test]
fn product_solver_matches_dense_block_source() {
    let b = Budget::default();
    for (levels, w, n) in [(2, 1, 1), (2, 1, 2), (3, 1, 1), (2, 2, 2)] {
        let sys = build_full_shift(Alphabet::QuantizedInterval { levels }, w, Policy::Exhaustive, &b).unwrap();
        let words = sys.words(sys.depth_len(n), &b).unwrap();
        let mu = MeasureOnSystem::uniform(words, Provenance::Product);
        let p = vec![1.0 / levels as f64; levels];
        for eps in [0.05, 0.2, 0.45, 0.9] {
            let dense = dynamical_rd(&sys, &mu, n, eps, None).unwrap();
            let prod = product_rd(&sys, &p, n, eps).unwrap();
            assert!(
                (dense.rate - prod.rate).abs() < 2e-6,
                "levels {levels} W {w} N {n} eps {eps}: dense {} product {}",
                dense.rate,
                prod.rate
            );
        }
    }
}
