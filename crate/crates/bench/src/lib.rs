//! Criterion benchmarks for the core solvers live in `benches/solvers.rs`.
