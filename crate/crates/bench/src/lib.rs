//! Criterion benchmarks for kirchhoff-core live under `benches/`.
