//! Criterion benchmarks for the DSC toolkit; see `benches/`.
