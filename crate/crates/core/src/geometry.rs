//! Quantum Fisher information metric and the generalized natural gradient.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::ansatz::CircuitSpec;
use crate::error::{Error, Result};
use crate::statevec::{inner, StateVector, C64};

/// Relative eigenvalue floor: eigenvalues below `EIGEN_FLOOR · max(Λ)` are
/// treated as numerically zero.
pub const EIGEN_FLOOR: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-10;

/// Real symmetric positive-semidefinite metric on parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    matrix: DMatrix<f64>,
}

impl Metric {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Size(format!(
                "metric must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let n = matrix.nrows();
        for i in 0..n {
            for j in 0..i {
                let d = (matrix[(i, j)] - matrix[(j, i)]).abs();
                if d > SYMMETRY_TOL {
                    return Err(Error::Contract(format!(
                        "metric not symmetric: |F[{i},{j}] - F[{j},{i}]| = {d:e}"
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            matrix: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `Tr(F²)`, which for symmetric `F` is the squared Frobenius norm.
    pub fn trace_sq(&self) -> f64 {
        self.matrix.iter().map(|x| x * x).sum()
    }

    /// `F + ε I`.
    pub fn regularized(&self, epsilon: f64) -> Self {
        let mut matrix = self.matrix.clone();
        for i in 0..matrix.nrows() {
            matrix[(i, i)] += epsilon;
        }
        Self { matrix }
    }

    /// `xᵀ F y`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.matrix[(i, j)] * y[j];
            }
            acc += x[i] * row;
        }
        acc
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Size(format!(
                "vector length {} does not match metric dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Assembles `F_ij = 4 Re[⟨∂_iψ|∂_jψ⟩ − ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩]`.
///
/// The imaginary (Berry curvature) part of the geometric tensor is
/// antisymmetric and is not part of the metric.
pub fn metric_from_tangents(psi: &[C64], tangents: &[Vec<C64>]) -> Result<Metric> {
    let m = tangents.len();
    let dim = psi.len();
    if tangents.iter().any(|t| t.len() != dim) {
        return Err(Error::Size("tangent length differs from state length".into()));
    }
    // Re⟨a|b⟩ is the real dot product of the stacked (re, im) vectors.
    let stacked = DMatrix::from_fn(2 * dim, m, |r, c| {
        let z = tangents[c][r % dim];
        if r < dim {
            z.re
        } else {
            z.im
        }
    });
    let gram = stacked.tr_mul(&stacked);
    let berry: Vec<C64> = tangents.iter().map(|t| inner(psi, t)).collect();
    let matrix = DMatrix::from_fn(m, m, |i, j| {
        let (a, b) = (berry[i], berry[j]);
        let v = 4.0 * (gram[(i, j)] - (a.re * b.re + a.im * b.im));
        let w = 4.0 * (gram[(j, i)] - (a.re * b.re + a.im * b.im));
        0.5 * (v + w)
    });
    Metric::new(matrix)
}

/// QFIM of `circuit` at `theta`, from exact tangents.
pub fn qfim(circuit: &CircuitSpec, theta: &[f64]) -> Result<Metric> {
    let (psi, tangents) = circuit.state_and_tangents(theta)?;
    metric_from_tangents(psi.amplitudes(), &tangents)
}

/// Same as [`qfim`] but also returns the prepared state.
pub fn qfim_with_state(circuit: &CircuitSpec, theta: &[f64]) -> Result<(StateVector, Metric)> {
    let (psi, tangents) = circuit.state_and_tangents(theta)?;
    let f = metric_from_tangents(psi.amplitudes(), &tangents)?;
    Ok((psi, f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientConfig {
    pub beta: f64,
    pub epsilon_r: f64,
    /// Clamp sub-floor eigenvalues even when `β > ½` and `ε_R = 0`,
    /// instead of raising a conditioning error. Off by default; useful only
    /// for studying the unregularized instability itself.
    pub clamp_singular: bool,
}

impl GradientConfig {
    pub fn new(beta: f64, epsilon_r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Contract(format!("beta must lie in [0, 1], got {beta}")));
        }
        if !(epsilon_r >= 0.0 && epsilon_r.is_finite()) {
            return Err(Error::Contract(format!(
                "regularization must be finite and >= 0, got {epsilon_r}"
            )));
        }
        Ok(Self {
            beta,
            epsilon_r,
            clamp_singular: false,
        })
    }

    pub fn clamping_singular(mut self) -> Self {
        self.clamp_singular = true;
        self
    }

    /// `ε_R = 0.1` for `β = 1`, otherwise `0`.
    pub fn with_default_reg(beta: f64) -> Result<Self> {
        Self::new(beta, if beta > 0.5 { 0.1 } else { 0.0 })
    }
}

/// Eigendecomposition of `F + ε I` with the relative floor applied.
struct FlooredEigen {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    floor: f64,
}

impl FlooredEigen {
    fn new(f: &Metric, epsilon_r: f64) -> Self {
        let mut m = f.matrix.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += epsilon_r;
        }
        let eig = SymmetricEigen::new(m);
        let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
            floor: EIGEN_FLOOR * max.max(f64::MIN_POSITIVE),
        }
    }

    /// `Q Λ^p Qᵀ`. Negative powers of sub-floor eigenvalues use the floor,
    /// unless `strict`, in which case they are a conditioning error.
    fn power(&self, p: f64, strict: bool, beta: f64) -> Result<DMatrix<f64>> {
        let n = self.values.len();
        if p == 0.0 {
            return Ok(DMatrix::identity(n, n));
        }
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let lam = if p < 0.0 && lambda < self.floor {
                if strict {
                    return Err(Error::Conditioning {
                        eigenvalue: lambda,
                        floor: self.floor,
                        beta,
                    });
                }
                self.floor
            } else {
                lambda.max(0.0)
            };
            let w = lam.powf(p);
            scaled.column_mut(k).iter_mut().for_each(|x| *x *= w);
        }
        Ok(scaled * self.vectors.transpose())
    }
}

/// `(F + ε_R I)^{-β}`.
///
/// `β = 0` is exactly the identity. With `ε_R = 0` and `β > ½`, an
/// eigenvalue below the floor is an error; otherwise it is clamped.
pub fn fractional_inverse(f: &Metric, beta: f64, epsilon_r: f64) -> Result<DMatrix<f64>> {
    inverse_power(f, GradientConfig::new(beta, epsilon_r)?)
}

fn inverse_power(f: &Metric, cfg: GradientConfig) -> Result<DMatrix<f64>> {
    if cfg.beta == 0.0 {
        return Ok(DMatrix::identity(f.dim(), f.dim()));
    }
    let strict = cfg.beta > 0.5 && cfg.epsilon_r == 0.0 && !cfg.clamp_singular;
    FlooredEigen::new(f, cfg.epsilon_r).power(-cfg.beta, strict, cfg.beta)
}

/// `G_β = (F + ε_R I)^{-β} ∇K`.
pub fn gqng(f: &Metric, grad: &[f64], config: GradientConfig) -> Result<Vec<f64>> {
    f.check_len(grad)?;
    if config.beta == 0.0 {
        return Ok(grad.to_vec());
    }
    let inv = inverse_power(f, config)?;
    Ok((inv * DVector::from_column_slice(grad)).as_slice().to_vec())
}

/// Fidelity after the step `θ' = θ + α G_β` predicted by the Gaussian model
/// (unregularized), with `delta_theta = θ − θ_t`:
///
/// `K' = K · exp[−¼(α² ∇Kᵀ F^{1−2β} ∇K + 2α Δθᵀ F^{1−β} ∇K)]`.
pub fn predicted_update_fidelity(
    k_now: f64,
    f: &Metric,
    grad: &[f64],
    beta: f64,
    alpha: f64,
    delta_theta: &[f64],
) -> Result<f64> {
    f.check_len(grad)?;
    f.check_len(delta_theta)?;
    if alpha == 0.0 {
        return Ok(k_now);
    }
    GradientConfig::new(beta, 0.0)?;
    let eig = FlooredEigen::new(f, 0.0);
    let g = DVector::from_column_slice(grad);
    let d = DVector::from_column_slice(delta_theta);
    let quad = g.dot(&(eig.power(1.0 - 2.0 * beta, beta > 0.5, beta)? * &g));
    let cross = d.dot(&(eig.power(1.0 - beta, false, beta)? * &g));
    Ok(k_now * (-0.25 * (alpha * alpha * quad + 2.0 * alpha * cross)).exp())
}
