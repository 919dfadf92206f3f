//! Criterion benchmarks for the glossing pipeline; see `benches/`.
