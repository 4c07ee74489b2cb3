//! Criterion benchmarks for the dirreg kernels; see `benches/`.
