//! Criterion benchmarks for the solver, grader and prompt builder; see `benches/`.
