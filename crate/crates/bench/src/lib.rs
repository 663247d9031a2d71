//! Criterion benchmarks for `zp-core`; see `benches/`.
