//! Benchmark harness crate; benches live under `benches/`.
