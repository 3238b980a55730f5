//! Variational linear solving of the 1-D finite-element Poisson problem on a
//! dense statevector simulator: ansatz circuits, decompositions of the
//! stiffness operator, shot-based estimators, cost functions, optimizers, and
//! an experiment harness.
//!
//! Qubit 0 is the least significant bit of a basis index; bitstrings are
//! printed most-significant qubit first.

pub mod circuit;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod optimize;
pub mod poisson;
pub mod rng;
pub mod sim;
pub mod vqls;

pub use circuit::{build_ansatz, build_rhs, param_count, AnsatzFamily, Angle, Circuit, Gate, GateKind, RhsKind, XPlacement};
pub use error::{Error, Result};
pub use estimation::{EstimatorConfig, Mode};
pub use num_complex::Complex64;
pub use optimize::{OptimizerConfig, RunResult};
pub use poisson::{decomposition, stiffness, Decomposition, Method, StiffnessSystem};
pub use sim::{marginalize, sample_counts, sample_counts_noisy, Counts, EigenMap, NoiseParams, StateVector};
pub use vqls::{CostKind, CostEvalRecord, Problem};
