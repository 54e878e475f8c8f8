//! Benchmarks live in `benches/solver.rs`; this crate exports nothing.
