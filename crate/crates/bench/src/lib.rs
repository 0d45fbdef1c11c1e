//! Criterion benchmarks for splitlqr; see `benches/`.
