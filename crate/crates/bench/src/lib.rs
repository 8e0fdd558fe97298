//! Criterion benchmarks for the solver and cross-validation live under `benches/`.
