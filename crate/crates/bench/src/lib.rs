//! Criterion benchmarks for the `xxz-gge` numerics live in `benches/`.
