//! Benchmarks for the sweeps behind the reproduction checklist; see `benches/`.
