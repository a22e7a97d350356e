//! Parameterized circuit ansätze and their derivatives.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::seed;
use crate::statevec::{fidelity, inner, Gate, GateKind, GateParam, StateVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnsatzKind {
    /// Y and Z rotations on every qubit, alternating CNOT brickwork.
    YzCnot,
    /// As `YzCnot` with √iSWAP entanglers.
    YzSqrtIswap,
    /// Fixed `RY(π/2)` layer, then random-axis rotations and a CPHASE chain.
    RCphase,
    /// One `RY` per qubit, no entanglers; its metric is the identity.
    Product,
}

impl AnsatzKind {
    pub const CLI_NAMES: [&'static str; 3] = ["yz-cnot", "yz-sqiswap", "r-cphase"];

    pub fn name(self) -> &'static str {
        match self {
            AnsatzKind::YzCnot => "yz-cnot",
            AnsatzKind::YzSqrtIswap => "yz-sqiswap",
            AnsatzKind::RCphase => "r-cphase",
            AnsatzKind::Product => "product",
        }
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "yz-cnot" => Ok(AnsatzKind::YzCnot),
            "yz-sqiswap" => Ok(AnsatzKind::YzSqrtIswap),
            "r-cphase" => Ok(AnsatzKind::RCphase),
            other => Err(Error::Contract(format!(
                "unknown ansatz '{other}', expected one of: {}",
                Self::CLI_NAMES.join(", ")
            ))),
        }
    }
}

/// Immutable gate list with parameter-slot bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub kind: AnsatzKind,
    pub n_qubits: usize,
    pub layers: usize,
    pub axis_seed: Option<u64>,
    gates: Vec<Gate>,
    n_params: usize,
}

/// Builds one of the three hardware-efficient ansätze.
///
/// Entangler chains use open boundaries. For `YzCnot`/`YzSqrtIswap`, layer
/// `l` (1-indexed) couples 1-indexed pairs `(2n-1, 2n)` when `l` is odd and
/// `(2n, 2n+1)` when even. `RCphase` draws its rotation axes from
/// `axis_seed`, which therefore is part of the circuit's identity.
pub fn build_ansatz(
    kind: AnsatzKind,
    n_qubits: usize,
    layers: usize,
    axis_seed: Option<u64>,
) -> Result<CircuitSpec> {
    if n_qubits < 2 {
        return Err(Error::Size(format!("ansatz needs at least 2 qubits, got {n_qubits}")));
    }
    if n_qubits > crate::statevec::MAX_QUBITS {
        return Err(Error::Size(format!("{n_qubits} qubits exceeds supported maximum")));
    }
    if layers < 1 {
        return Err(Error::Size("ansatz needs at least one layer".into()));
    }
    let mut gates = Vec::new();
    let mut slot = 0;
    match kind {
        AnsatzKind::YzCnot | AnsatzKind::YzSqrtIswap => {
            let ent = if kind == AnsatzKind::YzCnot {
                GateKind::Cnot
            } else {
                GateKind::SqrtIswap
            };
            for layer in 1..=layers {
                for axis in [GateKind::Ry, GateKind::Rz] {
                    for q in 0..n_qubits {
                        gates.push(Gate::rotation(axis, q, GateParam::Slot(slot)));
                        slot += 1;
                    }
                }
                let first = if layer % 2 == 1 { 0 } else { 1 };
                for a in (first..n_qubits - 1).step_by(2) {
                    gates.push(Gate::entangler(ent, a, a + 1));
                }
            }
        }
        AnsatzKind::RCphase => {
            let axis_seed = axis_seed.ok_or_else(|| {
                Error::Contract("r-cphase ansatz requires an axis seed".into())
            })?;
            let mut rng = seed::rng(axis_seed);
            for q in 0..n_qubits {
                gates.push(Gate::rotation(GateKind::Ry, q, GateParam::Fixed(FRAC_PI_2)));
            }
            for _ in 0..layers {
                for q in 0..n_qubits {
                    let axis = [GateKind::Rx, GateKind::Ry, GateKind::Rz][rng.random_range(0..3)];
                    gates.push(Gate::rotation(axis, q, GateParam::Slot(slot)));
                    slot += 1;
                }
                for a in 0..n_qubits - 1 {
                    gates.push(Gate::entangler(GateKind::Cphase, a, a + 1));
                }
            }
        }
        AnsatzKind::Product => {
            return Err(Error::Contract(
                "product ansatz is built with CircuitSpec::product".into(),
            ))
        }
    }
    Ok(CircuitSpec {
        kind,
        n_qubits,
        layers,
        axis_seed: if kind == AnsatzKind::RCphase { axis_seed } else { None },
        gates,
        n_params: slot,
    })
}

impl CircuitSpec {
    /// `⊗_n (cos(θ_n/2)|0⟩ + sin(θ_n/2)|1⟩)`.
    pub fn product(n_qubits: usize) -> Result<Self> {
        if !(1..=crate::statevec::MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::Size(format!("unsupported qubit count {n_qubits}")));
        }
        let gates = (0..n_qubits)
            .map(|q| Gate::rotation(GateKind::Ry, q, GateParam::Slot(q)))
            .collect();
        Ok(Self {
            kind: AnsatzKind::Product,
            n_qubits,
            layers: 1,
            axis_seed: None,
            gates,
            n_params: n_qubits,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// One line per gate; equal strings mean equal circuits.
    pub fn describe(&self) -> String {
        let mut out = format!("{} n={} p={}\n", self.kind, self.n_qubits, self.layers);
        for g in &self.gates {
            let _ = writeln!(out, "{:?} {:?} {:?}", g.kind, g.qubits, g.param);
        }
        out
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(Error::Size(format!(
                "expected {} parameters, got {}",
                self.n_params,
                theta.len()
            )));
        }
        Ok(())
    }

    fn angle(gate: &Gate, theta: &[f64]) -> f64 {
        match gate.param {
            GateParam::Slot(j) => theta[j],
            GateParam::Fixed(a) => a,
            GateParam::None => 0.0,
        }
    }

    /// Uniform draw from `[0, 2π)` per slot.
    pub fn random_params<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.n_params)
            .map(|_| rng.random_range(0.0..2.0 * PI))
            .collect()
    }

    /// `U(θ)|0…0⟩`.
    pub fn prepare(&self, theta: &[f64]) -> Result<StateVector> {
        self.check_params(theta)?;
        let mut psi = StateVector::zero(self.n_qubits)?;
        let n = self.n_qubits;
        for g in &self.gates {
            g.apply_raw(psi.amps_mut(), n, Self::angle(g, theta), false);
        }
        Ok(psi)
    }

    /// State and the tangents `∂_j|ψ(θ)⟩`, indexed by slot.
    ///
    /// Each tangent is the forward pass with the generator `-iσ/2` inserted
    /// right after its gate; all of them are propagated in a single sweep.
    pub fn state_and_tangents(&self, theta: &[f64]) -> Result<(StateVector, Vec<Vec<C64>>)> {
        self.check_params(theta)?;
        let n = self.n_qubits;
        let mut psi = StateVector::zero(n)?;
        let mut tangents: Vec<Vec<C64>> = Vec::with_capacity(self.n_params);
        let mut slot_of = Vec::with_capacity(self.n_params);
        for g in &self.gates {
            let angle = Self::angle(g, theta);
            g.apply_raw(psi.amps_mut(), n, angle, false);
            for t in tangents.iter_mut() {
                g.apply_raw(t, n, angle, false);
            }
            if let GateParam::Slot(j) = g.param {
                let mut t = psi.amplitudes().to_vec();
                g.apply_generator(&mut t, n);
                tangents.push(t);
                slot_of.push(j);
            }
        }
        let mut by_slot = vec![Vec::new(); self.n_params];
        for (t, j) in tangents.into_iter().zip(slot_of) {
            by_slot[j] = t;
        }
        Ok((psi, by_slot))
    }

    pub fn tangents(&self, theta: &[f64]) -> Result<Vec<Vec<C64>>> {
        Ok(self.state_and_tangents(theta)?.1)
    }

    /// `K(θ) = |⟨target|ψ(θ)⟩|²`.
    pub fn fidelity_to(&self, theta: &[f64], target: &StateVector) -> Result<f64> {
        fidelity(target, &self.prepare(theta)?)
    }

    /// Exact `∂_j K = 2 Re[⟨ψ_t|∂_jψ⟩⟨ψ|ψ_t⟩]`, by a reverse sweep.
    pub fn fidelity_gradient(&self, theta: &[f64], target: &StateVector) -> Result<Vec<f64>> {
        let psi = self.prepare(theta)?;
        if target.n_qubits() != self.n_qubits {
            return Err(Error::Size(format!(
                "target has {} qubits, circuit {}",
                target.n_qubits(),
                self.n_qubits
            )));
        }
        let overlap = inner(psi.amplitudes(), target.amplitudes());
        let n = self.n_qubits;
        let mut phi = psi.into_amplitudes();
        let mut lam = target.amplitudes().to_vec();
        let mut grad = vec![0.0; self.n_params];
        let mut scratch = vec![C64::new(0.0, 0.0); phi.len()];
        for g in self.gates.iter().rev() {
            let angle = Self::angle(g, theta);
            if let GateParam::Slot(j) = g.param {
                scratch.copy_from_slice(&phi);
                g.apply_generator(&mut scratch, n);
                grad[j] = 2.0 * (inner(&lam, &scratch) * overlap).re;
            }
            g.apply_raw(&mut phi, n, angle, true);
            g.apply_raw(&mut lam, n, angle, true);
        }
        Ok(grad)
    }

    /// `∂_j K = ½[K(θ + π/2 e_j) − K(θ − π/2 e_j)]`, exact for Pauli rotations.
    pub fn parameter_shift_gradient(&self, theta: &[f64], target: &StateVector) -> Result<Vec<f64>> {
        self.check_params(theta)?;
        let mut shifted = theta.to_vec();
        (0..self.n_params)
            .map(|j| {
                shifted[j] = theta[j] + FRAC_PI_2;
                let plus = self.fidelity_to(&shifted, target)?;
                shifted[j] = theta[j] - FRAC_PI_2;
                let minus = self.fidelity_to(&shifted, target)?;
                shifted[j] = theta[j];
                Ok(0.5 * (plus - minus))
            })
            .collect()
    }
}
