//! Criterion benchmarks for `geolab-core`; see `benches/`.
