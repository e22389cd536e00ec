use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use meandim::hausdorff::{frostman_measure, hausdorff_content};
use meandim::ratedist::{blahut_arimoto, Target};
use meandim::shift_cover::{box_cover_bounds, shift_kernel, Letter};
use meandim::tiling::{lemma_trace, tile};
use meandim::{covering_number, Budget, DiscreteDistribution, Family, FiniteMetricSpace, Mode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn plane(n: usize, seed: u64) -> FiniteMetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
    let dist = pts
        .iter()
        .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
        .collect();
    FiniteMetricSpace::from_matrix("plane", dist).unwrap()
}

fn covering(c: &mut Criterion) {
    let budget = Budget::default();
    let mut g = c.benchmark_group("covering_number");
    for n in [12, 16, 20] {
        let sp = plane(n, 1);
        g.bench_with_input(BenchmarkId::new("exact", n), &sp, |b, sp| {
            b.iter(|| covering_number(black_box(sp), 0.3, Mode::Exact, &budget).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("greedy", n), &sp, |b, sp| {
            b.iter(|| covering_number(black_box(sp), 0.3, Mode::Greedy, &budget).unwrap())
        });
    }
    g.finish();
}

fn content(c: &mut Criterion) {
    let budget = Budget::default();
    let sp = plane(12, 2);
    c.bench_function("hausdorff_content exact n=12", |b| {
        b.iter(|| hausdorff_content(black_box(&sp), 1.0, 0.4, 0.05, Mode::Exact, &budget).unwrap())
    });
    c.bench_function("frostman balls n=12", |b| {
        b.iter(|| frostman_measure(black_box(&sp), 1.0, 0.4, 0.05, Family::Balls, &budget).unwrap())
    });
}

fn rate(c: &mut Criterion) {
    let sp = plane(32, 3);
    let p = DiscreteDistribution::new(vec![1.0 / 32.0; 32]).unwrap();
    c.bench_function("blahut_arimoto 32x32", |b| {
        b.iter(|| blahut_arimoto(black_box(&p), &sp.dist, Target::Distortion(0.2)).unwrap())
    });
    let kernel = shift_kernel(3);
    let letter = Letter::Line((0..8).map(|i| i as f64 / 7.0).collect());
    c.bench_function("box_cover_bounds k=8 W=3 N=4", |b| {
        b.iter(|| box_cover_bounds(black_box(&letter), &kernel, 4, 0.177, 1.0).unwrap())
    });
}

fn voronoi(c: &mut Criterion) {
    let trace = lemma_trace(&mut ChaCha8Rng::seed_from_u64(4), -150, 800, 5);
    c.bench_function("tile 800 markers", |b| b.iter(|| tile(black_box(&trace)).unwrap()));
}

criterion_group!(benches, covering, content, rate, voronoi);
criterion_main!(benches);
