//! Benchmarks live in `benches/`; see `cargo bench -p kypher-bench`.
