//! Adaptive quantum natural gradient: statevector simulation, variational
//! ansätze, Fisher geometry, optimizers and experiment drivers.

pub mod analysis;
pub mod ansatz;
pub mod control;
pub mod error;
pub mod geometry;
pub mod optimize;
pub mod pvqd;
pub mod seed;
pub mod statevec;

pub use ansatz::{build_ansatz, AnsatzKind, CircuitSpec};
pub use error::{Error, Result};
pub use geometry::{fractional_inverse, gqng, predicted_update_fidelity, qfim, GradientConfig, Metric};
pub use optimize::{Method, Objective, OptimizerConfig, TraceRow, TrainTrace};
pub use statevec::{evolve_exact, expectation, fidelity, Gate, GateKind, GateParam, Hamiltonian, Pauli, StateVector, C64};
