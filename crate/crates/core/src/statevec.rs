//! Dense statevector engine.
//!
//! Basis convention: qubit 0 is the most significant bit of the basis index,
//! so for `n` qubits qubit `q` lives at bit `n - 1 - q`. Rotations follow
//! `R_a(θ) = exp(-i θ σ^a / 2)` and time evolution uses `∂_t ψ = -i H ψ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest register the dense engine will allocate.
pub const MAX_QUBITS: usize = 24;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[inline]
fn bit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// Unit-norm pure state over `2^n_qubits` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Size(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Size(format!(
                "amplitude length {dim} is not a power of two >= 2"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Contract(
                "amplitudes must have finite non-zero norm".into(),
            ));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_same_dim(self, other)?;
        Ok(inner(&self.amps, &other.amps))
    }

    /// Multiplies every amplitude by `e^{iφ}`.
    pub fn with_global_phase(mut self, phi: f64) -> Self {
        let phase = C64::from_polar(1.0, phi);
        self.amps.iter_mut().for_each(|a| *a *= phase);
        self
    }

    /// Applies `gate` in place. `angle` must be given exactly for rotations.
    pub fn apply(&mut self, gate: &Gate, angle: Option<f64>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let angle = gate.check_angle(angle)?;
        gate.apply_raw(&mut self.amps, self.n_qubits, angle, false);
        Ok(())
    }

    /// Applies the inverse of `gate` in place.
    pub fn apply_inverse(&mut self, gate: &Gate, angle: Option<f64>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let angle = gate.check_angle(angle)?;
        gate.apply_raw(&mut self.amps, self.n_qubits, angle, true);
        Ok(())
    }

    /// Wraps amplitudes that are unit-norm by construction.
    pub(crate) fn from_raw_unchecked(n_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }
}

fn check_qubit_count(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::Size(format!(
            "qubit count {n} outside supported range 1..={MAX_QUBITS}"
        )))
    }
}

fn check_same_dim(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::Size(format!(
            "state qubit counts differ: {} vs {}",
            a.n_qubits, b.n_qubits
        )));
    }
    Ok(())
}

/// `Σ conj(a_i) b_i`.
#[inline]
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    C64::new(re, im)
}

/// Returns the standalone result of applying `gate` to `state`.
pub fn apply_gate(state: &StateVector, gate: &Gate, angle: Option<f64>) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate, angle)?;
    Ok(out)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cnot,
    /// Controlled-Z, i.e. `diag(1, 1, 1, -1)`.
    Cphase,
    SqrtIswap,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn arity(self) -> usize {
        if self.is_rotation() {
            1
        } else {
            2
        }
    }
}

/// Where a gate's rotation angle comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateParam {
    None,
    /// Index into the circuit parameter vector.
    Slot(usize),
    /// Angle baked into the circuit.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    /// For two-qubit gates the first entry is the control (CNOT).
    pub qubits: Vec<usize>,
    pub param: GateParam,
}

impl Gate {
    pub fn rotation(kind: GateKind, qubit: usize, param: GateParam) -> Self {
        Self {
            kind,
            qubits: vec![qubit],
            param,
        }
    }

    pub fn entangler(kind: GateKind, a: usize, b: usize) -> Self {
        Self {
            kind,
            qubits: vec![a, b],
            param: GateParam::None,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::Contract(format!(
                "{:?} acts on {} qubits, got {}",
                self.kind,
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        match (self.kind.is_rotation(), self.param) {
            (true, GateParam::None) => {
                return Err(Error::Contract(format!(
                    "{:?} needs a parameter slot or fixed angle",
                    self.kind
                )))
            }
            (false, GateParam::Slot(_) | GateParam::Fixed(_)) => {
                return Err(Error::Contract(format!(
                    "{:?} takes no parameter",
                    self.kind
                )))
            }
            _ => {}
        }
        for &q in &self.qubits {
            if q >= n_qubits {
                return Err(Error::Index {
                    index: q,
                    n_qubits,
                });
            }
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::Contract(format!(
                "{:?} needs distinct qubits, got {} twice",
                self.kind, self.qubits[0]
            )));
        }
        Ok(())
    }

    fn check_angle(&self, angle: Option<f64>) -> Result<f64> {
        match (self.kind.is_rotation(), angle) {
            (true, Some(a)) if a.is_finite() => Ok(a),
            (true, Some(a)) => Err(Error::Contract(format!("non-finite angle {a}"))),
            (true, None) => Err(Error::Contract(format!(
                "{:?} requires an angle",
                self.kind
            ))),
            (false, None) => Ok(0.0),
            (false, Some(_)) => Err(Error::Contract(format!(
                "{:?} takes no angle",
                self.kind
            ))),
        }
    }

    /// Unchecked kernel used by circuit evaluation; the gate must already be
    /// validated against `n_qubits`.
    pub(crate) fn apply_raw(&self, amps: &mut [C64], n_qubits: usize, angle: f64, inverse: bool) {
        let angle = if inverse { -angle } else { angle };
        match self.kind {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => {
                apply_1q(amps, n_qubits, self.qubits[0], &rotation_matrix(self.kind, angle))
            }
            GateKind::Cnot => apply_cnot(amps, n_qubits, self.qubits[0], self.qubits[1]),
            GateKind::Cphase => apply_cz(amps, n_qubits, self.qubits[0], self.qubits[1]),
            GateKind::SqrtIswap => {
                apply_sqrt_iswap(amps, n_qubits, self.qubits[0], self.qubits[1], inverse)
            }
        }
    }

    /// Multiplies by the rotation generator `-i σ^a / 2` (not unitary).
    pub(crate) fn apply_generator(&self, amps: &mut [C64], n_qubits: usize) {
        let h = C64::new(0.5, 0.0);
        let m = match self.kind {
            GateKind::Rx => [[ZERO, -I * h], [-I * h, ZERO]],
            GateKind::Ry => [[ZERO, -h], [h, ZERO]],
            GateKind::Rz => [[-I * h, ZERO], [ZERO, I * h]],
            _ => unreachable!("generator requested for entangling gate"),
        };
        apply_1q(amps, n_qubits, self.qubits[0], &m);
    }
}

pub(crate) fn rotation_matrix(kind: GateKind, angle: f64) -> [[C64; 2]; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    match kind {
        GateKind::Rx => [
            [C64::new(c, 0.0), C64::new(0.0, -s)],
            [C64::new(0.0, -s), C64::new(c, 0.0)],
        ],
        GateKind::Ry => [
            [C64::new(c, 0.0), C64::new(-s, 0.0)],
            [C64::new(s, 0.0), C64::new(c, 0.0)],
        ],
        GateKind::Rz => [[C64::new(c, -s), ZERO], [ZERO, C64::new(c, s)]],
        _ => unreachable!("rotation matrix requested for entangling gate"),
    }
}

fn apply_1q(amps: &mut [C64], n_qubits: usize, qubit: usize, m: &[[C64; 2]; 2]) {
    let mask = bit_mask(n_qubits, qubit);
    for block in (0..amps.len()).step_by(2 * mask) {
        for i in block..block + mask {
            let a0 = amps[i];
            let a1 = amps[i | mask];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn apply_cnot(amps: &mut [C64], n_qubits: usize, control: usize, target: usize) {
    let cm = bit_mask(n_qubits, control);
    let tm = bit_mask(n_qubits, target);
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

fn apply_cz(amps: &mut [C64], n_qubits: usize, a: usize, b: usize) {
    let both = bit_mask(n_qubits, a) | bit_mask(n_qubits, b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & both == both {
            *amp = -*amp;
        }
    }
}

fn apply_sqrt_iswap(amps: &mut [C64], n_qubits: usize, a: usize, b: usize, inverse: bool) {
    let am = bit_mask(n_qubits, a);
    let bm = bit_mask(n_qubits, b);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let off = if inverse { C64::new(0.0, -r) } else { C64::new(0.0, r) };
    let diag = C64::new(r, 0.0);
    for i in 0..amps.len() {
        // i = |01⟩ on (a, b); partner is |10⟩
        if i & am == 0 && i & bm != 0 {
            let j = (i | am) & !bm;
            let x = amps[i];
            let y = amps[j];
            amps[i] = diag * x + off * y;
            amps[j] = off * x + diag * y;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Hermitian operator on `n_qubits` (energy units, ħ = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_qubits: usize,
    matrix: DMatrix<C64>,
}

/// Tolerance on `max |H - H†|`.
pub const HERMITIAN_TOL: f64 = 1e-12;

impl Hamiltonian {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Size(format!(
                "Hamiltonian must be square with power-of-two dimension, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..=i {
                worst = worst.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if worst >= HERMITIAN_TOL {
            return Err(Error::Contract(format!(
                "matrix is not Hermitian (max |H - H†| = {worst:e})"
            )));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn zeros(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let dim = 1 << n_qubits;
        Ok(Self {
            n_qubits,
            matrix: DMatrix::zeros(dim, dim),
        })
    }

    /// Adds `coeff · ⊗_k σ^{p_k}_{q_k}`.
    pub fn add_pauli_term(&mut self, coeff: f64, term: &[(usize, Pauli)]) -> Result<()> {
        let n = self.n_qubits;
        let mut flip = 0usize;
        for &(q, _) in term {
            if q >= n {
                return Err(Error::Index { index: q, n_qubits: n });
            }
        }
        for &(q, p) in term {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip ^= bit_mask(n, q);
            }
        }
        for col in 0..self.matrix.ncols() {
            let mut phase = C64::new(coeff, 0.0);
            for &(q, p) in term {
                let set = col & bit_mask(n, q) != 0;
                phase *= match (p, set) {
                    (Pauli::X, _) => ONE,
                    (Pauli::Y, false) => I,
                    (Pauli::Y, true) => -I,
                    (Pauli::Z, false) => ONE,
                    (Pauli::Z, true) => -ONE,
                };
            }
            self.matrix[(col ^ flip, col)] += phase;
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, state: &StateVector) -> Result<DVector<C64>> {
        self.check_dim(state)?;
        Ok(&self.matrix * DVector::from_column_slice(state.amplitudes()))
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::of(&self.matrix)
    }

    fn check_dim(&self, state: &StateVector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Size(format!(
                "Hamiltonian on {} qubits applied to {}-qubit state",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        Ok(())
    }
}

/// Eigendecomposition `H = V diag(λ) V†` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: DMatrix<C64>,
}

impl Spectrum {
    pub(crate) fn of(matrix: &DMatrix<C64>) -> Self {
        // Real symmetric matrices (every X/Z Hamiltonian) take the
        // several-times cheaper real solver.
        if matrix.iter().all(|z| z.im == 0.0) {
            let eig = SymmetricEigen::new(matrix.map(|z| z.re));
            return Self::sorted(&eig.eigenvalues, |r, k| C64::new(eig.eigenvectors[(r, k)], 0.0));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        Self::sorted(&eig.eigenvalues, |r, k| eig.eigenvectors[(r, k)])
    }

    fn sorted(values: &DVector<f64>, vector: impl Fn(usize, usize) -> C64) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        Self {
            values: order.iter().map(|&k| values[k]).collect(),
            vectors: DMatrix::from_fn(values.len(), values.len(), |r, c| vector(r, order[c])),
        }
    }

    /// Dense propagator `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lambda * t);
            scaled.column_mut(k).iter_mut().for_each(|v| *v *= phase);
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(-i H t) ψ` without forming the propagator.
    pub fn evolve(&self, state: &StateVector, t: f64) -> StateVector {
        let psi = DVector::from_column_slice(state.amplitudes());
        let mut coeffs = self.vectors.ad_mul(&psi);
        for (c, &lambda) in coeffs.iter_mut().zip(&self.values) {
            *c *= C64::from_polar(1.0, -lambda * t);
        }
        let out = &self.vectors * coeffs;
        StateVector::from_raw_unchecked(state.n_qubits(), out.as_slice().to_vec())
    }
}

/// `exp(-i H t) ψ` via Hermitian eigendecomposition.
pub fn evolve_exact(state: &StateVector, h: &Hamiltonian, t: f64) -> Result<StateVector> {
    h.check_dim(state)?;
    if !t.is_finite() {
        return Err(Error::Contract(format!("evolution time must be finite, got {t}")));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    Ok(h.spectrum().evolve(state, t))
}

/// `⟨ψ|H|ψ⟩`.
pub fn expectation(state: &StateVector, h: &Hamiltonian) -> Result<f64> {
    let h_psi = h.apply(state)?;
    let value = inner(state.amplitudes(), h_psi.as_slice());
    debug_assert!(value.im.abs() < 1e-10, "imaginary expectation {}", value.im);
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn plus() -> StateVector {
        StateVector::from_amplitudes(vec![ONE, ONE]).unwrap()
    }

    fn sigma_z() -> Hamiltonian {
        let mut h = Hamiltonian::zeros(1).unwrap();
        h.add_pauli_term(1.0, &[(0, Pauli::Z)]).unwrap();
        h
    }

    #[test]
    fn zero_state_layout() {
        assert_eq!(StateVector::zero(1).unwrap().amplitudes(), &[ONE, ZERO]);
        assert_eq!(
            StateVector::zero(2).unwrap().amplitudes(),
            &[ONE, ZERO, ZERO, ZERO]
        );
        let s = StateVector::zero(3).unwrap();
        assert_eq!(s.dim(), 8);
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(matches!(StateVector::zero(0), Err(Error::Size(_))));
        assert!(matches!(StateVector::zero(25), Err(Error::Size(_))));
    }

    #[test]
    fn ry_pi_flips() {
        let g = Gate::rotation(GateKind::Ry, 0, GateParam::Slot(0));
        let s = apply_gate(&StateVector::zero(1).unwrap(), &g, Some(PI)).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cnot_truth_table() {
        let g = Gate::entangler(GateKind::Cnot, 0, 1);
        // |10⟩ has qubit 0 set, i.e. index 0b10
        let s = apply_gate(&StateVector::basis(2, 0b10).unwrap(), &g, None).unwrap();
        assert_eq!(s, StateVector::basis(2, 0b11).unwrap());
        let s = apply_gate(&StateVector::basis(2, 0b01).unwrap(), &g, None).unwrap();
        assert_eq!(s, StateVector::basis(2, 0b01).unwrap());
    }

    #[test]
    fn cphase_signs_11() {
        let g = Gate::entangler(GateKind::Cphase, 0, 1);
        let s = apply_gate(&StateVector::basis(2, 3).unwrap(), &g, None).unwrap();
        assert_eq!(s.amplitudes()[3], -ONE);
    }

    #[test]
    fn sqrt_iswap_matrix() {
        let g = Gate::entangler(GateKind::SqrtIswap, 0, 1);
        let s = apply_gate(&StateVector::basis(2, 0b01).unwrap(), &g, None).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[1] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[2] - C64::new(0.0, r)).norm() < 1e-15);
        let mut back = s.clone();
        back.apply_inverse(&g, None).unwrap();
        assert!((fidelity(&back, &StateVector::basis(2, 1).unwrap()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gate_contract_errors() {
        let mut s = StateVector::zero(2).unwrap();
        let rot = Gate::rotation(GateKind::Rx, 0, GateParam::Slot(0));
        assert!(matches!(s.apply(&rot, None), Err(Error::Contract(_))));
        let cx = Gate::entangler(GateKind::Cnot, 0, 1);
        assert!(matches!(s.apply(&cx, Some(1.0)), Err(Error::Contract(_))));
        let bad = Gate::entangler(GateKind::Cnot, 0, 2);
        assert!(matches!(s.apply(&bad, None), Err(Error::Index { index: 2, .. })));
        let same = Gate::entangler(GateKind::Cphase, 1, 1);
        assert!(matches!(s.apply(&same, None), Err(Error::Contract(_))));
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::zero(1).unwrap();
        assert_eq!(fidelity(&zero, &zero).unwrap(), 1.0);
        let g = Gate::rotation(GateKind::Ry, 0, GateParam::Slot(0));
        let half = apply_gate(&zero, &g, Some(FRAC_PI_2)).unwrap();
        assert!((fidelity(&zero, &half).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            fidelity(&zero, &StateVector::zero(2).unwrap()),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn evolve_examples() {
        let z = sigma_z();
        let zero = StateVector::zero(1).unwrap();
        assert_eq!(evolve_exact(&plus(), &z, 0.0).unwrap(), plus());
        let e = evolve_exact(&zero, &z, 1.7).unwrap();
        assert!((fidelity(&e, &zero).unwrap() - 1.0).abs() < 1e-14);
        let e = evolve_exact(&plus(), &z, 0.3).unwrap();
        // ⟨+|e^{-iσ^z t}|+⟩ = cos t
        assert!((fidelity(&e, &plus()).unwrap() - 0.3f64.cos().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn expectation_examples() {
        let z = sigma_z();
        assert!((expectation(&StateVector::zero(1).unwrap(), &z).unwrap() - 1.0).abs() < 1e-15);
        assert!(expectation(&plus(), &z).unwrap().abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = ONE;
        assert!(matches!(Hamiltonian::new(m), Err(Error::Contract(_))));
    }

    #[test]
    fn pauli_y_matrix() {
        let mut h = Hamiltonian::zeros(1).unwrap();
        h.add_pauli_term(1.0, &[(0, Pauli::Y)]).unwrap();
        assert_eq!(h.matrix()[(0, 1)], -I);
        assert_eq!(h.matrix()[(1, 0)], I);
    }
}
