//! Statistical checks of the Gaussian-kernel picture: kernel scans,
//! gradient variance against its prediction, one-step training statistics,
//! and the closed-form model quantities.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::ansatz::CircuitSpec;
use crate::error::{Error, Result};
use crate::geometry::{qfim, GradientConfig, Metric};
use crate::optimize::{
    adaptive_direction, init_at_infidelity_to, make_unreachable_target, CircuitObjective, Objective,
};
use crate::seed::instance_rng;
use crate::statevec::{fidelity, StateVector};

/// `Π_n cos²(Δθ_n/2)`: fidelity between two product states `⊗ RY(θ_n)|0⟩`.
pub fn product_ansatz_fidelity(delta: &[f64]) -> f64 {
    delta.iter().map(|d| (0.5 * d).cos().powi(2)).product()
}

/// Mean fidelity between Haar-random states, also the gradient-variance
/// reference of deep random circuits up to the factor below.
pub fn random_state_fidelity(n_qubits: usize) -> f64 {
    0.5f64.powi(n_qubits as i32)
}

/// `1/2^{2N+1}`.
pub fn random_state_variance_floor(n_qubits: usize) -> f64 {
    0.5f64.powi(2 * n_qubits as i32 + 1)
}

/// `2√(bN ln 2)`.
pub fn epsilon_g_bound(b: f64, n_qubits: usize) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("b must be positive, got {b}")));
    }
    Ok(2.0 * (b * n_qubits as f64 * std::f64::consts::LN_2).sqrt())
}

fn check_fidelities(k: f64, k0: f64) -> Result<()> {
    if !(k0 > 0.0 && k0 <= 1.0) {
        return Err(Error::Domain(format!("K0 must lie in (0, 1], got {k0}")));
    }
    if !(k > 0.0) || k > k0 {
        return Err(Error::Domain(format!("need 0 < K ≤ K0, got K = {k}, K0 = {k0}")));
    }
    Ok(())
}

/// `(1/M) · Tr(F²)/Tr(F) · K² · log(K₀/K)`.
pub fn predicted_variance(f: &Metric, k: f64, k0: f64, m: usize) -> Result<f64> {
    check_fidelities(k, k0)?;
    let tr = f.trace();
    if !(tr > 0.0) {
        return Err(Error::Degenerate("metric has zero trace".into()));
    }
    Ok(f.trace_sq() / (tr * m as f64) * k * k * (k0 / k).ln())
}

/// `Tr(F)/M² · K² · log(K₀/K)`, a lower bound on [`predicted_variance`].
pub fn variance_lower_bound(f: &Metric, k: f64, k0: f64, m: usize) -> Result<f64> {
    check_fidelities(k, k0)?;
    let mf = m as f64;
    Ok(f.trace() / (mf * mf) * k * k * (k0 / k).ln())
}

/// Inverts the variance prediction for `Tr(F²)`.
pub fn estimate_trace_f2(empirical_var: f64, k: f64, k0: f64, m: usize, trace_f: f64) -> Result<f64> {
    check_fidelities(k, k0)?;
    if k == k0 {
        return Err(Error::Domain("K = K0 leaves Tr(F²) undetermined".into()));
    }
    if !(empirical_var > 0.0) {
        return Err(Error::Domain(format!("variance must be positive, got {empirical_var}")));
    }
    Ok(empirical_var * m as f64 * trace_f / (k * k * (k0 / k).ln()))
}

fn unit_normal<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let mut u: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= n);
    u
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub instance: usize,
    /// `ΔθᵀF(θ_t)Δθ`.
    pub norm: f64,
    pub fidelity: f64,
}

/// For each instance, a random `θ_t` and `n_points` displacements along
/// fresh random directions, scaled so that `ΔθᵀFΔθ` runs over an even grid
/// on `[0, max_norm]`.
pub fn kernel_scan(
    circuit: &CircuitSpec,
    n_instances: usize,
    n_points: usize,
    max_norm: f64,
    seed: u64,
) -> Result<Vec<KernelSample>> {
    if n_points < 2 || !(max_norm > 0.0) {
        return Err(Error::Contract("need at least 2 points and a positive maximum norm".into()));
    }
    let per_instance: Vec<Result<Vec<KernelSample>>> = (0..n_instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, i as u64);
            let theta_t = circuit.random_params(&mut rng);
            let (psi_t, f) = crate::geometry::qfim_with_state(circuit, &theta_t)?;
            (0..n_points)
                .map(|j| {
                    let x = max_norm * j as f64 / (n_points - 1) as f64;
                    let u = unit_normal(circuit.n_params(), &mut rng);
                    let q = f.inner(&u, &u);
                    let s = if x == 0.0 { 0.0 } else { (x / q).sqrt() };
                    let theta: Vec<f64> = theta_t.iter().zip(&u).map(|(t, d)| t + s * d).collect();
                    Ok(KernelSample {
                        instance: i,
                        norm: x,
                        fidelity: fidelity(&psi_t, &circuit.prepare(&theta)?)?,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(n_instances * n_points);
    for r in per_instance {
        out.extend(r?);
    }
    Ok(out)
}

/// Groups samples by their (shared, gridded) norm and returns
/// `(norm, mean −log K)` per group, ascending in norm.
pub fn binned_log_fidelity(samples: &[KernelSample]) -> Vec<(f64, f64)> {
    let mut keys: Vec<f64> = samples.iter().map(|s| s.norm).collect();
    keys.sort_by(f64::total_cmp);
    keys.dedup();
    keys.into_iter()
        .map(|x| {
            let vals: Vec<f64> = samples
                .iter()
                .filter(|s| s.norm == x)
                .map(|s| -s.fidelity.max(f64::MIN_POSITIVE).ln())
                .collect();
            (x, vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect()
}

/// Least-squares slope of binned `⟨−log K⟩` against `x/4` over `x ≤ max_x`.
pub fn kernel_slope(samples: &[KernelSample], max_x: f64) -> f64 {
    let pts: Vec<(f64, f64)> = binned_log_fidelity(samples)
        .into_iter()
        .filter(|&(x, _)| x <= max_x)
        .map(|(x, y)| (0.25 * x, y))
        .collect();
    linear_fit(&pts).1
}

/// Smallest binned norm `x` at which `⟨−log K⟩` deviates from `x/4` by more
/// than `rel_tol` relative; `√x` is then the empirical kernel radius in the
/// metric norm. `None` if the kernel holds over the whole scan.
pub fn empirical_kernel_radius(samples: &[KernelSample], rel_tol: f64) -> Option<f64> {
    binned_log_fidelity(samples)
        .into_iter()
        .filter(|&(x, _)| x > 0.0)
        .find(|&(x, y)| ((y - 0.25 * x) / (0.25 * x)).abs() > rel_tol)
        .map(|(x, _)| x.sqrt())
}

/// Ordinary least squares `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Fits `y = c · x^ν` on log-log axes; returns `(c, ν)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let (a, b) = linear_fit(&pts);
    (a.exp(), b)
}

/// One point of a variance scan, before pooling.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceInstance {
    pub instance: usize,
    pub infidelity: f64,
    pub grad: Vec<f64>,
    pub predicted: f64,
    pub lower: f64,
    pub trace_f: f64,
    pub trace_f2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSample {
    pub n_qubits: usize,
    pub m_params: usize,
    pub infidelity: f64,
    pub var_empirical: f64,
    pub var_predicted: f64,
    pub var_lower: f64,
    pub floor_random: f64,
}

/// Gradient and metric at a point of prescribed infidelity, for each
/// instance and each requested infidelity.
pub fn variance_instances(
    circuit: &CircuitSpec,
    infidelities: &[f64],
    n_instances: usize,
    seed: u64,
) -> Result<Vec<VarianceInstance>> {
    for &dk in infidelities {
        if !(dk > 0.0 && dk < 1.0) {
            return Err(Error::Contract(format!("infidelity must lie in (0, 1), got {dk}")));
        }
    }
    let m = circuit.n_params();
    let rows: Vec<Result<Vec<VarianceInstance>>> = (0..n_instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, i as u64);
            let theta_t = circuit.random_params(&mut rng);
            let target = circuit.prepare(&theta_t)?;
            let obj = CircuitObjective::new(circuit, &target)?;
            infidelities
                .iter()
                .map(|&dk| {
                    let theta = init_at_infidelity_to(circuit, &theta_t, &target, dk, &mut rng)?;
                    let k = obj.fidelity(&theta)?.min(1.0);
                    let (grad, f) = obj.gradient_and_metric(&theta)?;
                    Ok(VarianceInstance {
                        instance: i,
                        infidelity: dk,
                        grad,
                        predicted: predicted_variance(&f, k, 1.0, m)?,
                        lower: variance_lower_bound(&f, k, 1.0, m)?,
                        trace_f: f.trace(),
                        trace_f2: f.trace_sq(),
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Per-component variance over instances, averaged over components.
pub fn pooled_variance(grads: &[&[f64]]) -> f64 {
    let n = grads.len() as f64;
    let m = grads.first().map_or(0, |g| g.len());
    let mut total = 0.0;
    for k in 0..m {
        let mean = grads.iter().map(|g| g[k]).sum::<f64>() / n;
        total += grads.iter().map(|g| (g[k] - mean).powi(2)).sum::<f64>() / n;
    }
    total / m as f64
}

/// Pools [`variance_instances`] per infidelity bucket.
pub fn summarize_variance(circuit: &CircuitSpec, rows: &[VarianceInstance], infidelities: &[f64]) -> Vec<VarianceSample> {
    infidelities
        .iter()
        .map(|&dk| {
            let bucket: Vec<&VarianceInstance> = rows.iter().filter(|r| r.infidelity == dk).collect();
            let n = bucket.len() as f64;
            let grads: Vec<&[f64]> = bucket.iter().map(|r| r.grad.as_slice()).collect();
            VarianceSample {
                n_qubits: circuit.n_qubits,
                m_params: circuit.n_params(),
                infidelity: dk,
                var_empirical: pooled_variance(&grads),
                var_predicted: bucket.iter().map(|r| r.predicted).sum::<f64>() / n,
                var_lower: bucket.iter().map(|r| r.lower).sum::<f64>() / n,
                floor_random: random_state_variance_floor(circuit.n_qubits),
            }
        })
        .collect()
}

/// Empirical gradient variance per infidelity bucket next to its prediction.
pub fn variance_scan(
    circuit: &CircuitSpec,
    infidelities: &[f64],
    n_instances: usize,
    seed: u64,
) -> Result<Vec<VarianceSample>> {
    let rows = variance_instances(circuit, infidelities, n_instances, seed)?;
    Ok(summarize_variance(circuit, &rows, infidelities))
}

/// A training start: target parameters, target state, and a start point at
/// a prescribed infidelity to the target.
#[derive(Debug, Clone)]
pub struct OneStepInstance {
    pub theta_t: Vec<f64>,
    pub target: StateVector,
    pub theta: Vec<f64>,
}

impl OneStepInstance {
    pub fn sample<R: Rng + ?Sized>(circuit: &CircuitSpec, dk0: f64, k0: f64, rng: &mut R) -> Result<Self> {
        let theta_t = circuit.random_params(rng);
        let target = if k0 < 1.0 {
            make_unreachable_target(circuit, &theta_t, k0, rng)?
        } else {
            circuit.prepare(&theta_t)?
        };
        let theta = init_at_infidelity_to(circuit, &theta_t, &target, dk0, rng)?;
        Ok(Self { theta_t, target, theta })
    }
}

pub fn sample_instances(
    circuit: &CircuitSpec,
    dk0: f64,
    k0: f64,
    n_instances: usize,
    seed: u64,
) -> Result<Vec<OneStepInstance>> {
    (0..n_instances)
        .into_par_iter()
        .map(|i| OneStepInstance::sample(circuit, dk0, k0, &mut instance_rng(seed, i as u64)))
        .collect()
}

/// Infidelity after `θ + λ α_t G_β` for each `λ` in `scales`, per instance.
pub fn step_scan(
    circuit: &CircuitSpec,
    inst: &OneStepInstance,
    cfg: GradientConfig,
    scales: &[f64],
) -> Result<Vec<f64>> {
    let obj = CircuitObjective::new(circuit, &inst.target)?;
    let k = obj.fidelity(&inst.theta)?;
    let d = adaptive_direction(&obj, &inst.theta, k, cfg)?;
    scales
        .iter()
        .map(|&lambda| Ok(1.0 - obj.fidelity(&d.apply(&inst.theta, lambda * d.alpha_t))?))
        .collect()
}

/// Mean over instances of [`step_scan`].
pub fn mean_step_scan(
    circuit: &CircuitSpec,
    instances: &[OneStepInstance],
    cfg: GradientConfig,
    scales: &[f64],
) -> Result<Vec<f64>> {
    let per: Vec<Vec<f64>> = instances
        .par_iter()
        .map(|inst| step_scan(circuit, inst, cfg, scales))
        .collect::<Result<_>>()?;
    let n = per.len() as f64;
    Ok((0..scales.len())
        .map(|j| per.iter().map(|v| v[j]).sum::<f64>() / n)
        .collect())
}

/// Mean infidelity after one adaptive step.
pub fn mean_one_step_infidelity(
    circuit: &CircuitSpec,
    instances: &[OneStepInstance],
    cfg: GradientConfig,
) -> Result<f64> {
    Ok(mean_step_scan(circuit, instances, cfg, &[1.0])?[0])
}

/// `λ_j` on an even grid of `n` points over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub c: f64,
    pub nu: f64,
    /// `(−log(1−ΔK₀), mean post-step infidelity)`.
    pub points: Vec<(f64, f64)>,
}

/// Fits post-step infidelity `= c·[−log(1−ΔK₀)]^ν` over the given initial
/// infidelities.
pub fn scaling_fit(
    circuit: &CircuitSpec,
    initial_infidelities: &[f64],
    n_instances: usize,
    seed: u64,
    cfg: GradientConfig,
) -> Result<ScalingFit> {
    let mut points = Vec::with_capacity(initial_infidelities.len());
    for (j, &dk) in initial_infidelities.iter().enumerate() {
        let insts = sample_instances(circuit, dk, 1.0, n_instances, seed.wrapping_add(j as u64))?;
        points.push((-(1.0 - dk).ln(), mean_one_step_infidelity(circuit, &insts, cfg)?));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (c, nu) = fit_power_law(&xs, &ys);
    Ok(ScalingFit { c, nu, points })
}

/// Trace of `F²` at a random point, averaged over instances.
pub fn mean_trace_f2(circuit: &CircuitSpec, n_instances: usize, seed: u64) -> Result<f64> {
    let vals: Vec<f64> = (0..n_instances)
        .into_par_iter()
        .map(|i| {
            let theta = circuit.random_params(&mut instance_rng(seed, i as u64));
            Ok(qfim(circuit, &theta)?.trace_sq())
        })
        .collect::<Result<_>>()?;
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}
