//! Ground-state preparation by a piecewise-constant drive of the transverse
//! fields of an Ising chain.
//!
//! The drive Hamiltonian during step `p` is
//! `H_p = Σ_n X_n X_{n+1} + Σ_n (h_n^p Z_n + g X_n)`. Amplitudes are
//! flattened step-major: index `p·N + n`.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{metric_from_tangents, Metric};
use crate::optimize::{train, Objective, OptimizerConfig, TrainTrace};
use crate::statevec::{fidelity, inner, Hamiltonian, Pauli, Spectrum, StateVector, C64};

pub const DEFAULT_FD_DELTA: f64 = 1e-5;
pub const DEFAULT_QFIM_DELTA: f64 = 1e-4;
/// Ground states closer than this in energy are reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// `Σ X_n X_{n+1} + Σ_n (h_n Z_n + g X_n)`, open chain unless `periodic`.
pub fn driven_ising_hamiltonian(h: &[f64], g: f64, periodic: bool) -> Result<Hamiltonian> {
    let n = h.len();
    let mut ham = Hamiltonian::zeros(n)?;
    for (q, &hq) in h.iter().enumerate() {
        if q + 1 < n {
            ham.add_pauli_term(1.0, &[(q, Pauli::X), (q + 1, Pauli::X)])?;
        }
        ham.add_pauli_term(hq, &[(q, Pauli::Z)])?;
        ham.add_pauli_term(g, &[(q, Pauli::X)])?;
    }
    if periodic && n > 2 {
        ham.add_pauli_term(1.0, &[(n - 1, Pauli::X), (0, Pauli::X)])?;
    }
    Ok(ham)
}

/// `H₀ = Σ X_n X_{n+1} + Σ_n (h Z_n + g X_n)` on an open chain.
pub fn ising_hamiltonian(n_qubits: usize, h: f64, g: f64) -> Result<Hamiltonian> {
    if n_qubits < 2 {
        return Err(Error::Size(format!("Ising chain needs at least 2 qubits, got {n_qubits}")));
    }
    driven_ising_hamiltonian(&vec![h; n_qubits], g, false)
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: StateVector,
    pub energy: f64,
    /// `E₁ − E₀`.
    pub gap: f64,
    pub degenerate: bool,
}

/// Lowest eigenvector, with its largest-magnitude amplitude made real
/// positive. A degenerate ground space is flagged, not rejected.
pub fn ground_state(h: &Hamiltonian) -> GroundState {
    let spec = h.spectrum();
    let col = spec.vectors.column(0);
    let mut best = 0;
    for (i, z) in col.iter().enumerate() {
        if z.norm() > col[best].norm() + 1e-12 {
            best = i;
        }
    }
    let phase = col[best].conj() / col[best].norm();
    let amps: Vec<C64> = col.iter().map(|z| z * phase).collect();
    let gap = spec.values.get(1).map_or(f64::INFINITY, |e1| e1 - spec.values[0]);
    GroundState {
        state: StateVector::from_amplitudes(amps).expect("eigenvector is nonzero"),
        energy: spec.values[0],
        gap,
        degenerate: gap < DEGENERACY_GAP,
    }
}

/// Piecewise-constant schedule of per-qubit transverse fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProtocol {
    pub n_qubits: usize,
    pub steps: usize,
    pub dt: f64,
    /// `h_n^p` at index `p·N + n`.
    pub amplitudes: Vec<f64>,
    pub g: f64,
    pub periodic: bool,
}

impl ControlProtocol {
    pub fn new(n_qubits: usize, steps: usize, dt: f64, g: f64) -> Result<Self> {
        if !(1..=crate::statevec::MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::Size(format!("unsupported qubit count {n_qubits}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Contract(format!("time step must be positive, got {dt}")));
        }
        if !g.is_finite() {
            return Err(Error::Contract(format!("field must be finite, got {g}")));
        }
        Ok(Self {
            n_qubits,
            steps,
            dt,
            amplitudes: vec![0.0; n_qubits * steps],
            g,
            periodic: false,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_qubits * self.steps
    }

    pub fn total_time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    /// Draws every amplitude uniformly from `[−1, 1]`.
    pub fn randomize<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for a in &mut self.amplitudes {
            *a = rng.random_range(-1.0..=1.0);
        }
    }
}

#[derive(Debug, Clone)]
pub struct ControlProblem {
    pub protocol: ControlProtocol,
    pub target: StateVector,
    pub initial: StateVector,
    pub fd_delta: f64,
    pub qfim_delta: f64,
    /// Fixed part of every step Hamiltonian (couplings and `g`).
    base: DMatrix<C64>,
    /// `z[n][b]` = eigenvalue of `Z_n` on basis state `b`.
    z: Vec<Vec<f64>>,
}

impl ControlProblem {
    /// Target is the ground state of `H₀(target_h, target_g)`; initial state
    /// is `|0…0⟩`.
    pub fn new(protocol: ControlProtocol, target_h: f64, target_g: f64) -> Result<Self> {
        let n = protocol.n_qubits;
        let h0 = driven_ising_hamiltonian(&vec![target_h; n], target_g, protocol.periodic)?;
        let target = ground_state(&h0).state;
        Self::with_target(protocol, target)
    }

    pub fn with_target(protocol: ControlProtocol, target: StateVector) -> Result<Self> {
        let n = protocol.n_qubits;
        if target.n_qubits() != n {
            return Err(Error::Size(format!(
                "target has {} qubits, protocol {n}",
                target.n_qubits()
            )));
        }
        if protocol.amplitudes.len() != protocol.n_params() {
            return Err(Error::Size(format!(
                "expected {} amplitudes, got {}",
                protocol.n_params(),
                protocol.amplitudes.len()
            )));
        }
        let base = driven_ising_hamiltonian(&vec![0.0; n], protocol.g, protocol.periodic)?
            .matrix()
            .clone();
        let dim = 1usize << n;
        let z = (0..n)
            .map(|q| {
                (0..dim)
                    .map(|b| if b >> (n - 1 - q) & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        Ok(Self {
            initial: StateVector::zero(n)?,
            protocol,
            target,
            fd_delta: DEFAULT_FD_DELTA,
            qfim_delta: DEFAULT_QFIM_DELTA,
            base,
            z,
        })
    }

    pub fn with_initial(mut self, initial: StateVector) -> Result<Self> {
        if initial.n_qubits() != self.protocol.n_qubits {
            return Err(Error::Size("initial state size differs from protocol".into()));
        }
        self.initial = initial;
        Ok(self)
    }

    pub fn with_fd_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Contract(format!("finite-difference step must be positive, got {delta}")));
        }
        self.fd_delta = delta;
        Ok(self)
    }

    fn check(&self, amps: &[f64]) -> Result<()> {
        if amps.len() != self.protocol.n_params() {
            return Err(Error::Size(format!(
                "expected {} amplitudes, got {}",
                self.protocol.n_params(),
                amps.len()
            )));
        }
        Ok(())
    }

    fn step_spectrum(&self, row: &[f64]) -> Spectrum {
        let mut m = self.base.clone();
        for b in 0..m.nrows() {
            let d: f64 = row.iter().zip(&self.z).map(|(h, z)| h * z[b]).sum();
            m[(b, b)] += C64::new(d, 0.0);
        }
        Spectrum::of(&m)
    }

    fn row<'a>(&self, amps: &'a [f64], p: usize) -> &'a [f64] {
        let n = self.protocol.n_qubits;
        &amps[p * n..(p + 1) * n]
    }

    /// States after each step: `out[p]` is the state after `p` steps.
    fn forward(&self, amps: &[f64]) -> Vec<StateVector> {
        let mut states = Vec::with_capacity(self.protocol.steps + 1);
        states.push(self.initial.clone());
        for p in 0..self.protocol.steps {
            let next = self.step_spectrum(self.row(amps, p)).evolve(&states[p], self.protocol.dt);
            states.push(next);
        }
        states
    }

    pub fn evolve_with(&self, amps: &[f64]) -> Result<StateVector> {
        self.check(amps)?;
        Ok(self.forward(amps).pop().expect("forward has at least the initial state"))
    }

    pub fn fidelity_with(&self, amps: &[f64]) -> Result<f64> {
        fidelity(&self.target, &self.evolve_with(amps)?)
    }

    /// Central-difference gradient of the fidelity over all `d·N` amplitudes.
    ///
    /// Only the perturbed step is re-exponentiated: with `ψ_p` the forward
    /// states and `χ_p` the target propagated back from the end,
    /// `K = |⟨χ_{p+1}| U_p(h ± δ) |ψ_p⟩|²`.
    pub fn gradient_with(&self, amps: &[f64]) -> Result<Vec<f64>> {
        self.check(amps)?;
        let (n, d, dt) = (self.protocol.n_qubits, self.protocol.steps, self.protocol.dt);
        let delta = self.fd_delta;
        let forward = self.forward(amps);
        let mut backward = vec![self.target.clone(); d + 1];
        for p in (0..d).rev() {
            backward[p] = self.step_spectrum(self.row(amps, p)).evolve(&backward[p + 1], -dt);
        }
        let grad: Vec<f64> = (0..d * n)
            .into_par_iter()
            .map(|idx| {
                let (p, q) = (idx / n, idx % n);
                let mut row = self.row(amps, p).to_vec();
                let mut k = |shift: f64| {
                    row[q] = amps[idx] + shift;
                    let out = self.step_spectrum(&row).evolve(&forward[p], dt);
                    inner(backward[p + 1].amplitudes(), out.amplitudes()).norm_sqr()
                };
                (k(delta) - k(-delta)) / (2.0 * delta)
            })
            .collect();
        Ok(grad)
    }

    /// Central-difference tangents `∂|ψ(T)⟩/∂h_n^p` with step `qfim_delta`.
    pub fn tangents_with(&self, amps: &[f64]) -> Result<(StateVector, Vec<Vec<C64>>)> {
        self.check(amps)?;
        let (n, d, dt) = (self.protocol.n_qubits, self.protocol.steps, self.protocol.dt);
        let delta = self.qfim_delta;
        let forward = self.forward(amps);
        let spectra: Vec<Spectrum> = (0..d).map(|p| self.step_spectrum(self.row(amps, p))).collect();
        let tangents: Vec<Vec<C64>> = (0..d * n)
            .into_par_iter()
            .map(|idx| {
                let (p, q) = (idx / n, idx % n);
                let mut row = self.row(amps, p).to_vec();
                row[q] = amps[idx] + delta;
                let plus = self.step_spectrum(&row).evolve(&forward[p], dt);
                row[q] = amps[idx] - delta;
                let minus = self.step_spectrum(&row).evolve(&forward[p], dt);
                let diff: Vec<C64> = plus
                    .amplitudes()
                    .iter()
                    .zip(minus.amplitudes())
                    .map(|(a, b)| (a - b) / (2.0 * delta))
                    .collect();
                let mut t = StateVector::from_raw_unchecked(n, diff);
                for s in &spectra[p + 1..] {
                    t = s.evolve(&t, dt);
                }
                t.into_amplitudes()
            })
            .collect();
        Ok((forward[d].clone(), tangents))
    }

    pub fn qfim_with(&self, amps: &[f64]) -> Result<Metric> {
        let (psi, tangents) = self.tangents_with(amps)?;
        metric_from_tangents(psi.amplitudes(), &tangents)
    }
}

impl Objective for ControlProblem {
    fn n_params(&self) -> usize {
        self.protocol.n_params()
    }

    fn fidelity(&self, theta: &[f64]) -> Result<f64> {
        self.fidelity_with(theta)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.gradient_with(theta)
    }

    fn metric(&self, theta: &[f64]) -> Result<Metric> {
        self.qfim_with(theta)
    }
}

/// `ψ(T)` under the problem's own protocol.
pub fn evolve_protocol(problem: &ControlProblem) -> Result<StateVector> {
    problem.evolve_with(&problem.protocol.amplitudes)
}

/// `|⟨ψ_g|ψ(T)⟩|²`.
pub fn protocol_fidelity(problem: &ControlProblem) -> Result<f64> {
    problem.fidelity_with(&problem.protocol.amplitudes)
}

pub fn control_gradient(problem: &ControlProblem) -> Result<Vec<f64>> {
    problem.gradient_with(&problem.protocol.amplitudes)
}

pub fn control_qfim(problem: &ControlProblem) -> Result<Metric> {
    problem.qfim_with(&problem.protocol.amplitudes)
}

/// Optimizes the amplitudes starting from the problem's protocol.
pub fn train_control(problem: &ControlProblem, config: &OptimizerConfig) -> Result<TrainTrace> {
    train(problem, &problem.protocol.amplitudes, config)
}
