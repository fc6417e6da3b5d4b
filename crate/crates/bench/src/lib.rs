//! Criterion benchmarks for `mrf-core`; see `benches/`.
