//! Benchmark-only crate; see `benches/candidate_selection.rs`.
