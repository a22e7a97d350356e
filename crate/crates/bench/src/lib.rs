//! Shared fixtures for the benchmarks.

use aqng_core::analysis::OneStepInstance;
use aqng_core::control::{ControlProblem, ControlProtocol};
use aqng_core::seed::rng;
use aqng_core::{build_ansatz, AnsatzKind, CircuitSpec};

/// YZ-CNOT circuit with random parameters.
pub fn circuit(n: usize, p: usize, seed: u64) -> (CircuitSpec, Vec<f64>) {
    let c = build_ansatz(AnsatzKind::YzCnot, n, p, None).expect("valid circuit");
    let theta = c.random_params(&mut rng(seed));
    (c, theta)
}

/// Start point at infidelity 0.9 from a reachable random target.
pub fn training_start(n: usize, p: usize, seed: u64) -> (CircuitSpec, OneStepInstance) {
    let (c, _) = circuit(n, p, seed);
    let inst = OneStepInstance::sample(&c, 0.9, 1.0, &mut rng(seed)).expect("reachable start");
    (c, inst)
}

/// Randomized ground-state control problem with `g = 1`, `Δt = 1`.
pub fn control_problem(n: usize, steps: usize, seed: u64) -> ControlProblem {
    let mut protocol = ControlProtocol::new(n, steps, 1.0, 1.0).expect("valid protocol");
    protocol.randomize(&mut rng(seed));
    ControlProblem::new(protocol, 1.0, 1.0).expect("valid problem")
}
