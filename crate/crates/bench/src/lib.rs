//! Criterion benchmarks for the simulator and estimators.
