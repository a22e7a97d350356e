//! Fidelity maximization: adaptive-rate gradient ascent with the generalized
//! natural gradient, fixed-rate QNG, Adam, and the initialization helpers
//! used by the experiments.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::ansatz::CircuitSpec;
use crate::error::{Error, Result};
use crate::geometry::{gqng, metric_from_tangents, GradientConfig, Metric};
use crate::statevec::{inner, StateVector, C64};

/// Steps are skipped once `1 − K` falls below this; `log K` carries no
/// usable information past it.
pub const CONVERGED_INFIDELITY: f64 = 1e-13;

/// Something whose fidelity we maximize, with its gradient and metric.
pub trait Objective {
    fn n_params(&self) -> usize;
    fn fidelity(&self, theta: &[f64]) -> Result<f64>;
    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>>;
    fn metric(&self, theta: &[f64]) -> Result<Metric>;

    fn gradient_and_metric(&self, theta: &[f64]) -> Result<(Vec<f64>, Metric)> {
        Ok((self.gradient(theta)?, self.metric(theta)?))
    }
}

/// Fidelity of a circuit's output to a fixed target state.
#[derive(Debug, Clone, Copy)]
pub struct CircuitObjective<'a> {
    pub circuit: &'a CircuitSpec,
    pub target: &'a StateVector,
}

impl<'a> CircuitObjective<'a> {
    pub fn new(circuit: &'a CircuitSpec, target: &'a StateVector) -> Result<Self> {
        if target.n_qubits() != circuit.n_qubits {
            return Err(Error::Size(format!(
                "target has {} qubits, circuit {}",
                target.n_qubits(),
                circuit.n_qubits
            )));
        }
        Ok(Self { circuit, target })
    }
}

impl Objective for CircuitObjective<'_> {
    fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    fn fidelity(&self, theta: &[f64]) -> Result<f64> {
        self.circuit.fidelity_to(theta, self.target)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.circuit.fidelity_gradient(theta, self.target)
    }

    fn metric(&self, theta: &[f64]) -> Result<Metric> {
        crate::geometry::qfim(self.circuit, theta)
    }

    fn gradient_and_metric(&self, theta: &[f64]) -> Result<(Vec<f64>, Metric)> {
        let (psi, tangents) = self.circuit.state_and_tangents(theta)?;
        let t = self.target.amplitudes();
        let overlap: C64 = inner(psi.amplitudes(), t);
        let grad = tangents
            .iter()
            .map(|d| 2.0 * (inner(t, d) * overlap).re)
            .collect();
        Ok((grad, metric_from_tangents(psi.amplitudes(), &tangents)?))
    }
}

/// `K(θ) = K₀ exp(−¼ ΔθᵀFΔθ)` with `Δθ = θ − center` and constant `F`: the
/// model under which the adaptive learning rates are derived.
#[derive(Debug, Clone)]
pub struct GaussianObjective {
    pub metric: Metric,
    pub center: Vec<f64>,
    pub k0: f64,
}

impl GaussianObjective {
    pub fn new(metric: Metric, center: Vec<f64>, k0: f64) -> Result<Self> {
        if center.len() != metric.dim() {
            return Err(Error::Size("center length differs from metric dimension".into()));
        }
        if !(k0 > 0.0 && k0 <= 1.0) {
            return Err(Error::Domain(format!("K0 must lie in (0, 1], got {k0}")));
        }
        Ok(Self { metric, center, k0 })
    }

    fn delta(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.center.len() {
            return Err(Error::Size(format!(
                "expected {} parameters, got {}",
                self.center.len(),
                theta.len()
            )));
        }
        Ok(theta.iter().zip(&self.center).map(|(a, b)| a - b).collect())
    }
}

impl Objective for GaussianObjective {
    fn n_params(&self) -> usize {
        self.center.len()
    }

    fn fidelity(&self, theta: &[f64]) -> Result<f64> {
        let d = self.delta(theta)?;
        Ok(self.k0 * (-0.25 * self.metric.inner(&d, &d)).exp())
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let d = self.delta(theta)?;
        let k = self.k0 * (-0.25 * self.metric.inner(&d, &d)).exp();
        let fd = self.metric.matrix() * nalgebra::DVector::from_column_slice(&d);
        Ok(fd.iter().map(|x| -0.5 * k * x).collect())
    }

    fn metric(&self, _theta: &[f64]) -> Result<Metric> {
        Ok(self.metric.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Adaptive rates, plain gradient.
    AG,
    /// Adaptive rates, `β = ½`.
    AGqng,
    /// Adaptive rates, `β = 1` with regularization.
    AQng,
    /// Fixed-rate QNG.
    SQng,
    Adam,
}

impl Method {
    pub const CLI_NAMES: [&'static str; 5] = ["a-g", "a-gqng", "a-qng", "s-qng", "adam"];

    pub fn name(self) -> &'static str {
        match self {
            Method::AG => "a-g",
            Method::AGqng => "a-gqng",
            Method::AQng => "a-qng",
            Method::SQng => "s-qng",
            Method::Adam => "adam",
        }
    }

    pub fn is_adaptive(self) -> bool {
        matches!(self, Method::AG | Method::AGqng | Method::AQng)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a-g" => Ok(Method::AG),
            "a-gqng" => Ok(Method::AGqng),
            "a-qng" => Ok(Method::AQng),
            "s-qng" => Ok(Method::SQng),
            "adam" => Ok(Method::Adam),
            _ => Err(Error::Contract(format!(
                "unknown optimizer '{s}', expected one of {}",
                Method::CLI_NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    pub beta: f64,
    pub epsilon_r: f64,
    /// Learning rate of S-QNG and Adam; unused by the adaptive methods.
    pub fixed_alpha: f64,
    pub adam: AdamParams,
    pub iterations: usize,
    pub seed: u64,
}

impl OptimizerConfig {
    /// Method defaults: `A_G` β=0, `A_GQNG` β=½, `A_QNG` and `S_QNG` β=1 with
    /// ε_R=0.1, S-QNG α=1, Adam α=0.1.
    pub fn new(method: Method, iterations: usize) -> Result<Self> {
        let (beta, epsilon_r, fixed_alpha) = match method {
            Method::AG => (0.0, 0.0, 0.0),
            Method::AGqng => (0.5, 0.0, 0.0),
            Method::AQng => (1.0, 0.1, 0.0),
            Method::SQng => (1.0, 0.1, 1.0),
            Method::Adam => (0.0, 0.0, 0.1),
        };
        let cfg = Self {
            method,
            beta,
            epsilon_r,
            fixed_alpha,
            adam: AdamParams::default(),
            iterations,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_reg(mut self, epsilon_r: f64) -> Result<Self> {
        self.epsilon_r = epsilon_r;
        self.validate()?;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.fixed_alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn gradient_config(&self) -> Result<GradientConfig> {
        GradientConfig::new(self.beta, self.epsilon_r)
    }

    pub fn validate(&self) -> Result<()> {
        self.gradient_config()?;
        if self.iterations == 0 {
            return Err(Error::Contract("iterations must be at least 1".into()));
        }
        if !self.method.is_adaptive() && !(self.fixed_alpha > 0.0 && self.fixed_alpha.is_finite()) {
            return Err(Error::Contract(format!(
                "{} needs a positive learning rate, got {}",
                self.method, self.fixed_alpha
            )));
        }
        Ok(())
    }
}

/// `α₁ = 2√(−log K) / √(GᵀFG)`.
pub fn alpha_initial(g: &[f64], f: &Metric, k_now: f64) -> Result<f64> {
    check_fidelity(k_now)?;
    if k_now == 1.0 {
        return Ok(0.0);
    }
    let q = f.inner(g, g);
    if !(q > 0.0) {
        return Err(Error::Degenerate(format!("GᵀFG = {q:e} is not positive")));
    }
    Ok(2.0 * (-k_now.ln()).sqrt() / q.sqrt())
}

/// `α_t = ½[(4 / (α₁ GᵀFG)) log(K(θ₁)/K(θ)) + α₁]`.
pub fn alpha_adaptive(alpha1: f64, g: &[f64], f: &Metric, k_theta: f64, k_theta1: f64) -> Result<f64> {
    check_fidelity(k_theta)?;
    check_fidelity(k_theta1)?;
    let q = f.inner(g, g);
    if !(alpha1 > 0.0) || !(q > 0.0) {
        return Err(Error::Degenerate(format!(
            "adaptive rate needs α₁ > 0 and GᵀFG > 0, got α₁ = {alpha1:e}, GᵀFG = {q:e}"
        )));
    }
    Ok(0.5 * (4.0 / (alpha1 * q) * (k_theta1 / k_theta).ln() + alpha1))
}

fn check_fidelity(k: f64) -> Result<()> {
    if k > 0.0 && k <= 1.0 + 1e-12 {
        Ok(())
    } else {
        Err(Error::Domain(format!("fidelity must lie in (0, 1], got {k:e}")))
    }
}

/// Everything an adaptive step computes before moving.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveDirection {
    pub fidelity: f64,
    pub grad: Vec<f64>,
    /// `G_β`.
    pub direction: Vec<f64>,
    pub alpha1: f64,
    pub probe_fidelity: f64,
    pub alpha_t: f64,
}

impl AdaptiveDirection {
    pub fn apply(&self, theta: &[f64], scale: f64) -> Vec<f64> {
        theta
            .iter()
            .zip(&self.direction)
            .map(|(t, g)| t + scale * g)
            .collect()
    }
}

/// Computes `G_β`, `α₁`, the probe fidelity and `α_t` at `theta`, given the
/// already-evaluated `K(θ)`.
pub fn adaptive_direction<O: Objective + ?Sized>(
    obj: &O,
    theta: &[f64],
    k_now: f64,
    cfg: GradientConfig,
) -> Result<AdaptiveDirection> {
    if k_now <= 0.0 {
        return Err(Error::Domain("fidelity is zero, adaptive rate undefined".into()));
    }
    let k_now = k_now.min(1.0);
    let idle = |grad: Vec<f64>| AdaptiveDirection {
        fidelity: k_now,
        direction: vec![0.0; grad.len()],
        grad,
        alpha1: 0.0,
        probe_fidelity: k_now,
        alpha_t: 0.0,
    };
    if 1.0 - k_now <= CONVERGED_INFIDELITY {
        return Ok(idle(vec![0.0; obj.n_params()]));
    }
    let (grad, f) = obj.gradient_and_metric(theta)?;
    let direction = gqng(&f, &grad, cfg)?;
    if direction.iter().all(|&x| x == 0.0) {
        return Ok(idle(grad));
    }
    // Rates are measured in the same metric that shaped the direction. For
    // ε_R = 0 this is the kernel's own F.
    let f = if cfg.epsilon_r > 0.0 { f.regularized(cfg.epsilon_r) } else { f };
    let alpha1 = alpha_initial(&direction, &f, k_now)?;
    let theta1: Vec<f64> = theta.iter().zip(&direction).map(|(t, g)| t + alpha1 * g).collect();
    let probe_fidelity = obj.fidelity(&theta1)?.clamp(f64::MIN_POSITIVE, 1.0);
    let alpha_t = alpha_adaptive(alpha1, &direction, &f, k_now, probe_fidelity)?;
    Ok(AdaptiveDirection {
        fidelity: k_now,
        grad,
        direction,
        alpha1,
        probe_fidelity,
        alpha_t,
    })
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub fidelity_before: f64,
    pub alpha1: f64,
    pub alpha_t: f64,
    pub grad_norm: f64,
    /// `‖G_β‖₂` (or the Adam update direction).
    pub step_norm: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// One adaptive iteration: `θ' = θ + α_t G_β`.
pub fn adaptive_step<O: Objective + ?Sized>(
    obj: &O,
    theta: &[f64],
    cfg: GradientConfig,
) -> Result<(Vec<f64>, StepRecord)> {
    let k = obj.fidelity(theta)?;
    adaptive_step_from(obj, theta, k, cfg)
}

fn adaptive_step_from<O: Objective + ?Sized>(
    obj: &O,
    theta: &[f64],
    k_now: f64,
    cfg: GradientConfig,
) -> Result<(Vec<f64>, StepRecord)> {
    let d = adaptive_direction(obj, theta, k_now, cfg)?;
    let record = StepRecord {
        fidelity_before: d.fidelity,
        alpha1: d.alpha1,
        alpha_t: d.alpha_t,
        grad_norm: norm(&d.grad),
        step_norm: norm(&d.direction),
    };
    Ok((d.apply(theta, d.alpha_t), record))
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iteration: usize,
    pub infidelity: f64,
    pub alpha1: f64,
    pub alpha_t: f64,
    pub grad_norm: f64,
    pub step_norm: f64,
}

/// Bitwise equality, so rows with NaN placeholders compare equal to
/// themselves.
impl PartialEq for TraceRow {
    fn eq(&self, other: &Self) -> bool {
        let bits = |r: &Self| {
            [r.infidelity, r.alpha1, r.alpha_t, r.grad_norm, r.step_norm].map(f64::to_bits)
        };
        self.iteration == other.iteration && bits(self) == bits(other)
    }
}

/// Per-iteration history; row 0 is the initial point.
#[derive(Debug, Clone)]
pub struct TrainTrace {
    pub config: OptimizerConfig,
    pub rows: Vec<TraceRow>,
    /// Cumulative wall time at each row.
    pub wall_time: Vec<Duration>,
    pub final_theta: Vec<f64>,
}

impl PartialEq for TrainTrace {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.rows == other.rows && self.final_theta == other.final_theta
    }
}

impl TrainTrace {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn final_infidelity(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.infidelity)
    }

    pub fn infidelities(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.infidelity).collect()
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

/// Runs `config.iterations` updates of the configured method from `theta`.
pub fn train<O: Objective + ?Sized>(obj: &O, theta: &[f64], config: &OptimizerConfig) -> Result<TrainTrace> {
    config.validate()?;
    if theta.len() != obj.n_params() {
        return Err(Error::Size(format!(
            "expected {} parameters, got {}",
            obj.n_params(),
            theta.len()
        )));
    }
    let gcfg = config.gradient_config()?;
    let start = Instant::now();
    let mut theta = theta.to_vec();
    let mut k = obj.fidelity(&theta)?;
    let mut rows = Vec::with_capacity(config.iterations + 1);
    let mut wall_time = Vec::with_capacity(config.iterations + 1);
    rows.push(TraceRow {
        iteration: 0,
        infidelity: (1.0 - k).clamp(0.0, 1.0),
        alpha1: f64::NAN,
        alpha_t: f64::NAN,
        grad_norm: f64::NAN,
        step_norm: f64::NAN,
    });
    wall_time.push(start.elapsed());
    let mut adam = AdamState {
        m: vec![0.0; theta.len()],
        v: vec![0.0; theta.len()],
        t: 0,
    };
    for iteration in 1..=config.iterations {
        let record = match config.method {
            Method::AG | Method::AGqng | Method::AQng => {
                let (next, rec) = adaptive_step_from(obj, &theta, k, gcfg)?;
                theta = next;
                rec
            }
            Method::SQng => {
                let (grad, f) = obj.gradient_and_metric(&theta)?;
                let dir = gqng(&f, &grad, gcfg)?;
                for (t, g) in theta.iter_mut().zip(&dir) {
                    *t += config.fixed_alpha * g;
                }
                StepRecord {
                    fidelity_before: k,
                    alpha1: f64::NAN,
                    alpha_t: config.fixed_alpha,
                    grad_norm: norm(&grad),
                    step_norm: norm(&dir),
                }
            }
            Method::Adam => {
                let grad = obj.gradient(&theta)?;
                let p = config.adam;
                adam.t += 1;
                let c1 = 1.0 - p.beta1.powi(adam.t);
                let c2 = 1.0 - p.beta2.powi(adam.t);
                let mut step_sq = 0.0;
                for i in 0..theta.len() {
                    adam.m[i] = p.beta1 * adam.m[i] + (1.0 - p.beta1) * grad[i];
                    adam.v[i] = p.beta2 * adam.v[i] + (1.0 - p.beta2) * grad[i] * grad[i];
                    let dir = (adam.m[i] / c1) / ((adam.v[i] / c2).sqrt() + p.eps);
                    step_sq += dir * dir;
                    theta[i] += config.fixed_alpha * dir;
                }
                StepRecord {
                    fidelity_before: k,
                    alpha1: f64::NAN,
                    alpha_t: config.fixed_alpha,
                    grad_norm: norm(&grad),
                    step_norm: step_sq.sqrt(),
                }
            }
        };
        k = obj.fidelity(&theta)?;
        rows.push(TraceRow {
            iteration,
            infidelity: (1.0 - k).clamp(0.0, 1.0),
            alpha1: record.alpha1,
            alpha_t: record.alpha_t,
            grad_norm: record.grad_norm,
            step_norm: record.step_norm,
        });
        wall_time.push(start.elapsed());
    }
    Ok(TrainTrace {
        config: *config,
        rows,
        wall_time,
        final_theta: theta,
    })
}

/// [`train`] on the fidelity of `circuit` to `target`.
pub fn train_circuit(
    circuit: &CircuitSpec,
    theta: &[f64],
    target: &StateVector,
    config: &OptimizerConfig,
) -> Result<TrainTrace> {
    train(&CircuitObjective::new(circuit, target)?, theta, config)
}

const INIT_DIRECTIONS: usize = 10;
const INIT_BISECTIONS: usize = 200;
const INIT_MAX_SCALE: f64 = 1e3;

/// Parameters `θ_t + s·u` whose fidelity to `target` is `1 − ΔK₀`, for a
/// random unit direction `u` and bisected scale `s`.
pub fn init_at_infidelity_to<R: Rng + ?Sized>(
    circuit: &CircuitSpec,
    theta_t: &[f64],
    target: &StateVector,
    dk0: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(dk0 > 0.0 && dk0 < 1.0) {
        return Err(Error::Contract(format!("initial infidelity must lie in (0, 1), got {dk0}")));
    }
    let goal = 1.0 - dk0;
    let tol = 1e-4_f64.min(1e-2 * dk0);
    let obj = CircuitObjective::new(circuit, target)?;
    let m = circuit.n_params();
    let at = |u: &[f64], s: f64| -> Vec<f64> { theta_t.iter().zip(u).map(|(t, x)| t + s * x).collect() };
    for _ in 0..INIT_DIRECTIONS {
        let mut u: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&u);
        u.iter_mut().for_each(|x| *x /= n);
        let (mut lo, mut hi) = (0.0, 0.1);
        let mut bracketed = true;
        while obj.fidelity(&at(&u, hi))? > goal {
            lo = hi;
            hi *= 1.5;
            if hi > INIT_MAX_SCALE {
                bracketed = false;
                break;
            }
        }
        if !bracketed || obj.fidelity(&at(&u, lo))? < goal - tol {
            continue;
        }
        for _ in 0..INIT_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let theta = at(&u, mid);
            let k = obj.fidelity(&theta)?;
            if (k - goal).abs() < tol {
                return Ok(theta);
            }
            if k > goal {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Err(Error::Search(format!(
        "no parameters at infidelity {dk0} found along {INIT_DIRECTIONS} random directions"
    )))
}

/// [`init_at_infidelity_to`] with the target `prepare(θ_t)`.
pub fn init_at_infidelity<R: Rng + ?Sized>(
    circuit: &CircuitSpec,
    theta_t: &[f64],
    dk0: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let target = circuit.prepare(theta_t)?;
    init_at_infidelity_to(circuit, theta_t, &target, dk0, rng)
}

/// `√K₀ |ψ(θ_t)⟩ + √(1−K₀) |ψ_o⟩` with `|ψ_o⟩` Haar-random and orthogonal to
/// `|ψ(θ_t)⟩`, so the best fidelity the circuit can reach is `K₀`.
pub fn make_unreachable_target<R: Rng + ?Sized>(
    circuit: &CircuitSpec,
    theta_t: &[f64],
    k0: f64,
    rng: &mut R,
) -> Result<StateVector> {
    if !(k0 > 0.0 && k0 <= 1.0) {
        return Err(Error::Contract(format!("K0 must lie in (0, 1], got {k0}")));
    }
    let psi = circuit.prepare(theta_t)?;
    if k0 == 1.0 {
        return Ok(psi);
    }
    let p = psi.amplitudes();
    let mut other: Vec<C64> = (0..p.len())
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let c = inner(p, &other);
    for (o, a) in other.iter_mut().zip(p) {
        *o -= c * a;
    }
    let n = other.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let (a, b) = (k0.sqrt(), (1.0 - k0).sqrt() / n);
    let amps = p.iter().zip(&other).map(|(x, o)| x * a + o * b).collect();
    StateVector::from_amplitudes(amps)
}
