//! Criterion benchmarks for the solver and analysis hot paths; see `benches/`.
