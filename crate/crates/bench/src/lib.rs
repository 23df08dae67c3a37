//! Criterion benchmarks for the search routines live in `benches/`.
