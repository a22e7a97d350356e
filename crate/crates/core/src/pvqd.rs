//! Projected variational quantum dynamics: follow `e^{−iHt}|0…0⟩` by
//! repeatedly evolving the circuit state over one short step and refitting
//! the parameters to it.

use crate::ansatz::CircuitSpec;
use crate::error::{Error, Result};
use crate::geometry::Metric;
use crate::optimize::{train_circuit, OptimizerConfig};
use crate::statevec::{fidelity, evolve_exact, Gate, GateKind, GateParam, Hamiltonian, Pauli, StateVector, C64};

/// Eigenstates with `|⟨E_n|ψ⟩|²` at or below this do not count toward `ΔE`.
pub const OVERLAP_FLOOR: f64 = 1e-12;

/// `H = J Σ Z_n Z_{n+1} + h Σ X_n` on an open chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseIsing {
    pub n_qubits: usize,
    pub j: f64,
    pub h: f64,
}

impl TransverseIsing {
    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        let n = self.n_qubits;
        let mut ham = Hamiltonian::zeros(n)?;
        for q in 0..n {
            if q + 1 < n {
                ham.add_pauli_term(self.j, &[(q, Pauli::Z), (q + 1, Pauli::Z)])?;
            }
            ham.add_pauli_term(self.h, &[(q, Pauli::X)])?;
        }
        Ok(ham)
    }

    /// First-order product formula `e^{−iJΣZZ·Δt} e^{−ihΣX·Δt} ψ`.
    pub fn product_formula_step(&self, state: &StateVector, dt: f64) -> Result<StateVector> {
        let n = self.n_qubits;
        if state.n_qubits() != n {
            return Err(Error::Size("state size differs from model".into()));
        }
        let mut out = state.clone();
        for q in 0..n {
            let angle = 2.0 * self.h * dt;
            out.apply(&Gate::rotation(GateKind::Rx, q, GateParam::Fixed(angle)), Some(angle))?;
        }
        let amps: Vec<C64> = out
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(b, a)| {
                let zz: f64 = (0..n.saturating_sub(1))
                    .map(|q| if (b >> (n - 1 - q) ^ b >> (n - 2 - q)) & 1 == 1 { -1.0 } else { 1.0 })
                    .sum();
                a * C64::from_polar(1.0, -self.j * zz * dt)
            })
            .collect();
        StateVector::from_amplitudes(amps)
    }
}

/// `e^{−iHΔt}|ψ(θ)⟩`, computed exactly.
pub fn trotter_target(circuit: &CircuitSpec, theta: &[f64], h: &Hamiltonian, dt: f64) -> Result<StateVector> {
    evolve_exact(&circuit.prepare(theta)?, h, dt)
}

/// `max(0, 1 − ¼(ΔE Δt)²)`, a lower bound on `|⟨ψ|e^{−iHΔt}|ψ⟩|²` where
/// `ΔE` spans the energies that `ψ` overlaps.
pub fn gamma_bound(h: &Hamiltonian, psi: &StateVector, dt: f64) -> Result<f64> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::Contract(format!("time step must be non-negative, got {dt}")));
    }
    if psi.n_qubits() != h.n_qubits() {
        return Err(Error::Size("state size differs from Hamiltonian".into()));
    }
    let spec = h.spectrum();
    let coeffs = spec.vectors.ad_mul(&nalgebra::DVector::from_column_slice(psi.amplitudes()));
    let support: Vec<f64> = coeffs
        .iter()
        .zip(&spec.values)
        .filter(|(c, _)| c.norm_sqr() > OVERLAP_FLOOR)
        .map(|(_, &e)| e)
        .collect();
    let spread = match (support.first(), support.last()) {
        (Some(lo), Some(hi)) => hi - lo,
        _ => 0.0,
    };
    Ok((1.0 - 0.25 * (spread * dt).powi(2)).max(0.0))
}

/// `⟨(1/N) Σ Z_i⟩`.
pub fn magnetization(psi: &StateVector) -> f64 {
    let n = psi.n_qubits();
    psi.amplitudes()
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let ones = (b as u64).count_ones() as f64;
            a.norm_sqr() * (n as f64 - 2.0 * ones)
        })
        .sum::<f64>()
        / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetMode {
    #[default]
    Exact,
    ProductFormula,
}

#[derive(Debug, Clone)]
pub struct PvqdConfig {
    pub circuit: CircuitSpec,
    pub model: TransverseIsing,
    pub dt: f64,
    pub n_trotter: usize,
    pub n_train: usize,
    pub optimizer: OptimizerConfig,
    pub target_mode: TargetMode,
    pub seed: u64,
}

impl PvqdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.model.n_qubits != self.circuit.n_qubits {
            return Err(Error::Size("model and circuit qubit counts differ".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Contract(format!("time step must be positive, got {}", self.dt)));
        }
        if self.n_trotter == 0 || self.n_train == 0 {
            return Err(Error::Contract("step and training counts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvqdStep {
    pub step: usize,
    pub time: f64,
    /// Fidelity between the circuit state and its evolved target before
    /// training.
    pub pre_fidelity: f64,
    pub fidelity_exact: f64,
    pub magnetization: f64,
    pub exact_magnetization: f64,
    /// Infidelity to the step target after training.
    pub final_loss: f64,
    pub gamma_bound: f64,
    /// Set when training this step failed; parameters were kept.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvqdTrajectory {
    pub steps: Vec<PvqdStep>,
    pub final_theta: Vec<f64>,
}

/// Runs `n_trotter` steps from `θ = 0`, warm-starting each step's training
/// from the previous parameters.
pub fn pvqd_run(config: &PvqdConfig) -> Result<PvqdTrajectory> {
    config.validate()?;
    let circuit = &config.circuit;
    let h = config.model.hamiltonian()?;
    let spectrum = h.spectrum();
    let initial = StateVector::zero(circuit.n_qubits)?;
    let mut optimizer = config.optimizer;
    optimizer.iterations = config.n_train;
    optimizer.seed = config.seed;
    let mut theta = vec![0.0; circuit.n_params()];
    let mut steps = Vec::with_capacity(config.n_trotter);
    for k in 1..=config.n_trotter {
        let psi = circuit.prepare(&theta)?;
        let target = match config.target_mode {
            TargetMode::Exact => spectrum.evolve(&psi, config.dt),
            TargetMode::ProductFormula => config.model.product_formula_step(&psi, config.dt)?,
        };
        let pre_fidelity = fidelity(&target, &psi)?;
        let gamma = gamma_bound(&h, &psi, config.dt)?;
        let (final_loss, error) = match train_circuit(circuit, &theta, &target, &optimizer) {
            Ok(trace) => {
                theta = trace.final_theta.clone();
                (trace.final_infidelity(), None)
            }
            Err(e) => (1.0 - pre_fidelity, Some(e.to_string())),
        };
        let time = k as f64 * config.dt;
        let exact = spectrum.evolve(&initial, time);
        let state = circuit.prepare(&theta)?;
        steps.push(PvqdStep {
            step: k,
            time,
            pre_fidelity,
            fidelity_exact: fidelity(&exact, &state)?,
            magnetization: magnetization(&state),
            exact_magnetization: magnetization(&exact),
            final_loss,
            gamma_bound: gamma,
            error,
        });
    }
    Ok(PvqdTrajectory {
        steps,
        final_theta: theta,
    })
}

/// Lower bound on the gradient variance when training starts at fidelity
/// `γ`: `Tr(F)/M² · log(K₀/γ) · γ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauBound {
    pub value: f64,
    /// The bound is derived for `γ < 0.6 K₀`.
    pub in_validity_range: bool,
}

pub fn barren_plateau_bound(f: &Metric, gamma: f64, k0: f64, m: usize) -> Result<PlateauBound> {
    if !(k0 > 0.0 && k0 <= 1.0) || !(gamma > 0.0) {
        return Err(Error::Domain(format!("need 0 < γ ≤ K₀ ≤ 1, got γ = {gamma}, K₀ = {k0}")));
    }
    if gamma > k0 {
        return Err(Error::Domain(format!("γ = {gamma} exceeds K₀ = {k0}")));
    }
    if m == 0 {
        return Err(Error::Size("parameter count must be positive".into()));
    }
    let mf = m as f64;
    Ok(PlateauBound {
        value: f.trace() / (mf * mf) * (k0 / gamma).ln() * gamma * gamma,
        in_validity_range: gamma < 0.6 * k0,
    })
}
