//! End-to-end acceptance checks. Each criterion prints one line:
//! `criterion N: PASS|FAIL (runtime) details`.
//!
//! Run a subset with `cargo test -p aqng-core --test acceptance -- 3 7`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use aqng_core::analysis::{
    kernel_scan, kernel_slope, linspace, mean_one_step_infidelity, mean_step_scan, random_state_fidelity,
    sample_instances, scaling_fit, summarize_variance, variance_instances, estimate_trace_f2, pooled_variance,
};
use aqng_core::control::{train_control, ControlProblem, ControlProtocol};
use aqng_core::optimize::{adaptive_step, init_at_infidelity, train_circuit, GaussianObjective, Objective};
use aqng_core::pvqd::{gamma_bound, pvqd_run, PvqdConfig, TargetMode, TransverseIsing};
use aqng_core::seed::{instance_rng, rng};
use aqng_core::{
    build_ansatz, evolve_exact, fidelity, qfim, AnsatzKind, GradientConfig, Hamiltonian, Method, Metric,
    OptimizerConfig, Pauli, StateVector, C64,
};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn random_spd<R: Rng>(m: usize, rng: &mut R) -> Metric {
    let a = DMatrix::<f64>::from_fn(m, m, |_, _| rng.sample(StandardNormal));
    let f = &a * a.transpose() / m as f64 + DMatrix::identity(m, m) * 0.05;
    Metric::new(0.5 * (&f + f.transpose())).unwrap()
}

/// Random start on a Gaussian objective at fidelity `k_start · K₀`.
fn gaussian_start<R: Rng>(obj: &GaussianObjective, k_start: f64, rng: &mut R) -> Vec<f64> {
    let m = obj.center.len();
    let u: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let q = obj.metric.inner(&u, &u);
    let s = (-4.0 * k_start.ln() / q).sqrt();
    obj.center.iter().zip(&u).map(|(c, x)| c + s * x).collect()
}

fn c1_gaussian_exactness() -> Outcome {
    let mut r = rng(101);
    let mut worst_reachable: f64 = 0.0;
    let mut worst_unreachable: f64 = 0.0;
    let mut worst_qng: f64 = 0.0;
    for _ in 0..20 {
        let m = r.random_range(2..=32);
        let f = random_spd(m, &mut r);
        let center: Vec<f64> = (0..m).map(|_| r.random_range(-1.0..1.0)).collect();
        let k_start = r.random_range(0.2..0.9);
        for k0 in [1.0, 0.5] {
            let obj = GaussianObjective::new(f.clone(), center.clone(), k0).unwrap();
            let theta = gaussian_start(&obj, k_start, &mut r);
            for beta in [0.0, 0.5] {
                let (next, _) = adaptive_step(&obj, &theta, GradientConfig::new(beta, 0.0).unwrap()).unwrap();
                let residual = 1.0 - obj.fidelity(&next).unwrap() / k0;
                if k0 == 1.0 {
                    worst_reachable = worst_reachable.max(residual);
                } else {
                    worst_unreachable = worst_unreachable.max(residual);
                }
            }
            let (next, _) = adaptive_step(&obj, &theta, GradientConfig::new(1.0, 0.0).unwrap()).unwrap();
            worst_qng = worst_qng.max(1.0 - obj.fidelity(&next).unwrap() / k0);
        }
    }
    outcome(
        worst_reachable < 1e-9 && worst_unreachable < 1e-9,
        format!(
            "max residual beta in {{0, 1/2}}: K0=1 {worst_reachable:.3e}, K0=0.5 {worst_unreachable:.3e} \
             (need < 1e-9); beta=1 reference {worst_qng:.3e}"
        ),
    )
}

fn c2_qfim_correctness() -> Outcome {
    let mut r = rng(202);
    let mut ratios = Vec::new();
    let mut single = Vec::new();
    let mut grad_err: f64 = 0.0;
    for kind in [AnsatzKind::YzCnot, AnsatzKind::YzSqrtIswap, AnsatzKind::RCphase] {
        let c = build_ansatz(kind, 4, 3, Some(11)).unwrap();
        let theta = c.random_params(&mut r);
        let f = qfim(&c, &theta).unwrap();
        let psi = c.prepare(&theta).unwrap();
        let (mut coarse, mut fine) = (0.0, 0.0);
        for _ in 0..5 {
            let mut mu: Vec<f64> = (0..c.n_params()).map(|_| r.sample(StandardNormal)).collect();
            let n = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
            mu.iter_mut().for_each(|x| *x /= n);
            let err = |d: f64| {
                let th: Vec<f64> = theta.iter().zip(&mu).map(|(t, m)| t + d * m).collect();
                let k = fidelity(&psi, &c.prepare(&th).unwrap()).unwrap();
                ((1.0 - k) - 0.25 * d * d * f.inner(&mu, &mu)).abs()
            };
            let (a, b) = (err(1e-2), err(1e-3));
            single.push(a / b);
            coarse += a;
            fine += b;
        }
        ratios.push(coarse / fine);
        let target = c.prepare(&c.random_params(&mut r)).unwrap();
        let a = c.fidelity_gradient(&theta, &target).unwrap();
        let b = c.parameter_shift_gradient(&theta, &target).unwrap();
        for (x, y) in a.iter().zip(&b) {
            grad_err = grad_err.max((x - y).abs());
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    outcome(
        lo >= 500.0 && hi <= 1500.0 && grad_err < 1e-9,
        format!(
            "pooled remainder ratio per ansatz [{}] (need 500..1500), single-direction range [{:.0}, {:.0}]; \
             gradient vs shift max {grad_err:.2e}",
            ratios.iter().map(|r| format!("{r:.1}")).collect::<Vec<_>>().join(", "),
            single.iter().copied().fold(f64::INFINITY, f64::min),
            single.iter().copied().fold(0.0, f64::max),
        ),
    )
}

fn c3_gaussian_kernel() -> Outcome {
    let c = build_ansatz(AnsatzKind::YzCnot, 10, 10, None).unwrap();
    let small = kernel_scan(&c, 50, 11, 2.0, 303).unwrap();
    let slope = kernel_slope(&small, 2.0);
    let large = kernel_scan(&c, 50, 5, 4000.0, 304).unwrap();
    let far: Vec<f64> = large.iter().filter(|s| s.norm >= 1000.0).map(|s| s.fidelity).collect();
    let mean_far = mean(&far);
    let ratio = mean_far / random_state_fidelity(10);
    outcome(
        (0.85..=1.15).contains(&slope) && (1.0 / 3.0..=3.0).contains(&ratio),
        format!("slope {slope:.4} (need 0.85..1.15); large-norm mean {mean_far:.3e} = {ratio:.2} x 2^-10"),
    )
}

fn c4_variance_formula() -> Outcome {
    let c = build_ansatz(AnsatzKind::YzCnot, 10, 10, None).unwrap();
    let dks = [0.5, 0.9];
    let rows = variance_instances(&c, &dks, 200, 404).unwrap();
    let bound_ok = rows.iter().all(|r| r.lower <= r.predicted);
    let summary = summarize_variance(&c, &rows, &dks);
    let ratios: Vec<f64> = summary.iter().map(|s| s.var_empirical / s.var_predicted).collect();
    let within = ratios.iter().all(|r| (0.5..=2.0).contains(r));
    outcome(
        within && bound_ok,
        format!(
            "empirical/predicted at dK=0.5: {:.3}, dK=0.9: {:.3} (need 0.5..2); lower bound <= predicted on all {} instances: {bound_ok}",
            ratios[0],
            ratios[1],
            rows.len()
        ),
    )
}

fn c5_scaling_exponents() -> Outcome {
    let c = build_ansatz(AnsatzKind::YzCnot, 10, 10, None).unwrap();
    let dks = [0.01, 0.02, 0.05, 0.1, 0.2];
    let cases = [(0.0, 0.0, 1.0, 0.15, 0.32), (0.5, 0.0, 1.0, 0.15, 0.14), (1.0, 0.1, 1.5, 0.2, 0.072)];
    let mut pass = true;
    let mut detail = Vec::new();
    for (beta, reg, nu_want, nu_tol, c_want) in cases {
        let fit = scaling_fit(&c, &dks, 50, 505, GradientConfig::new(beta, reg).unwrap()).unwrap();
        let ok = (fit.nu - nu_want).abs() <= nu_tol && (0.5..=2.0).contains(&(fit.c / c_want));
        pass &= ok;
        detail.push(format!("beta={beta}: nu={:.3} c={:.4}", fit.nu, fit.c));
    }
    outcome(pass, detail.join("; "))
}

fn c6_gqng_stability() -> Outcome {
    let c = build_ansatz(AnsatzKind::YzCnot, 10, 10, None).unwrap();
    let insts = sample_instances(&c, 0.9, 1.0, 50, 606).unwrap();
    let betas = linspace(0.0, 1.0, 11);
    // Singular QFIM directions are clamped at the eigenvalue floor rather than
    // rejected, so the unregularized curve can be measured at all β.
    let sweep = |reg: f64| -> Result<Vec<f64>, String> {
        betas
            .iter()
            .map(|&b| {
                let cfg = GradientConfig::new(b, reg).unwrap().clamping_singular();
                mean_one_step_infidelity(&c, &insts, cfg).map_err(|e| e.to_string())
            })
            .collect()
    };
    let (plain, regd) = match (sweep(0.0), sweep(0.1)) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => {
            return outcome(
                false,
                format!("sweep failed: eps=0 {:?}, eps=0.1 {:?}", a.err(), b.err()),
            )
        }
    };
    let half = 5;
    let monotone = (0..half).all(|i| plain[i + 1] <= plain[i]);
    let rise = plain[7..].iter().copied().fold(0.0, f64::max) / plain[half];
    let rise_reg = regd[7..].iter().copied().fold(0.0, f64::max) / regd[half];
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(",");
    outcome(
        monotone && rise >= 2.0 && rise_reg < 2.0,
        format!(
            "eps=0: [{}] non-increasing to 0.5: {monotone}, max rise {rise:.2}x; eps=0.1: [{}] max rise {rise_reg:.2}x",
            fmt(&plain),
            fmt(&regd)
        ),
    )
}

fn c7_training_ordering() -> Outcome {
    let c = build_ansatz(AnsatzKind::YzCnot, 10, 10, None).unwrap();
    let starts: Vec<(StateVector, Vec<f64>)> = (0..50)
        .map(|i| {
            let mut r = instance_rng(707, i);
            let tt = c.random_params(&mut r);
            let th = init_at_infidelity(&c, &tt, 0.9, &mut r).unwrap();
            (c.prepare(&tt).unwrap(), th)
        })
        .collect();
    let final_median = |m: Method| {
        let cfg = OptimizerConfig::new(m, 20).unwrap();
        median(
            starts
                .iter()
                .map(|(t, th)| train_circuit(&c, th, t, &cfg).unwrap().final_infidelity())
                .collect(),
        )
    };
    let qng = final_median(Method::AQng);
    let gqng = final_median(Method::AGqng);
    let ag = final_median(Method::AG);
    let adam = final_median(Method::Adam);
    outcome(
        qng < gqng && gqng < ag && gqng < adam && qng * 10.0 <= adam,
        format!("median final infidelity A-QNG {qng:.3e}, A-GQNG {gqng:.3e}, A-G {ag:.3e}, Adam {adam:.3e}"),
    )
}

fn c8_adaptive_rate() -> Outcome {
    let c = build_ansatz(AnsatzKind::YzCnot, 10, 10, None).unwrap();
    let lambdas = linspace(0.5, 1.5, 51);
    let mut pass = true;
    let mut detail = Vec::new();
    for (j, dk) in [0.1, 0.5].into_iter().enumerate() {
        let insts = sample_instances(&c, dk, 1.0, 50, 808 + j as u64).unwrap();
        for (beta, reg) in [(0.0, 0.0), (0.5, 0.0), (1.0, 0.1)] {
            let curve = mean_step_scan(&c, &insts, GradientConfig::new(beta, reg).unwrap(), &lambdas).unwrap();
            let at = curve[25];
            let best = curve.iter().copied().fold(f64::INFINITY, f64::min);
            let excess = at / best - 1.0;
            pass &= excess <= 0.05;
            detail.push(format!("dK={dk} beta={beta}: +{:.2}%", 100.0 * excess));
        }
    }
    outcome(pass, format!("excess over grid minimum: {}", detail.join(", ")))
}

fn c9_control_ordering() -> Outcome {
    let problems: Vec<ControlProblem> = (0..20)
        .map(|i| {
            let mut p = ControlProtocol::new(6, 16, 1.0, 1.0).unwrap();
            p.randomize(&mut instance_rng(909, i));
            ControlProblem::new(p, 1.0, 1.0).unwrap()
        })
        .collect();
    let mean_trace = |m: Method| -> Vec<f64> {
        let cfg = OptimizerConfig::new(m, 60).unwrap();
        let traces: Vec<Vec<f64>> = problems
            .iter()
            .map(|p| train_control(p, &cfg).unwrap().infidelities())
            .collect();
        (0..=60).map(|i| mean(&traces.iter().map(|t| t[i]).collect::<Vec<_>>())).collect()
    };
    let qng = mean_trace(Method::AQng);
    let adam = mean_trace(Method::Adam);
    let ag = mean_trace(Method::AG);
    let windows = (0..=50).all(|i| qng[i + 10] <= qng[i]);
    outcome(
        qng[60] < adam[60] && qng[60] < ag[60] && windows,
        format!(
            "mean infidelity at 60: A-QNG {:.3e}, Adam {:.3e}, A-G {:.3e}; 10-step windows non-increasing: {windows}",
            qng[60], adam[60], ag[60]
        ),
    )
}

fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> Hamiltonian {
    let dim = 1 << n;
    let a = DMatrix::<C64>::from_fn(dim, dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    Hamiltonian::new((&a + a.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let amps = (0..1 << n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::from_amplitudes(amps).unwrap()
}

fn c10_time_energy_bound() -> Outcome {
    let mut r = rng(1010);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..200 {
        let n = r.random_range(1..=4);
        let h = random_hermitian(n, &mut r);
        let psi = random_state(n, &mut r);
        let dt = r.random_range(0.0..0.5);
        let k = fidelity(&psi, &evolve_exact(&psi, &h, dt).unwrap()).unwrap();
        let g = gamma_bound(&h, &psi, dt).unwrap();
        tightest = tightest.min(k - g);
        if k < g {
            violations += 1;
        }
    }
    let mut z = Hamiltonian::zeros(1).unwrap();
    z.add_pauli_term(1.0, &[(0, Pauli::Z)]).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = StateVector::from_amplitudes(vec![C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap();
    let mut analytic: f64 = 0.0;
    for dt in linspace(0.0, 0.5, 11) {
        let k = fidelity(&plus, &evolve_exact(&plus, &z, dt).unwrap()).unwrap();
        analytic = analytic.max((k - dt.cos().powi(2)).abs());
    }
    outcome(
        violations == 0 && analytic < 1e-12,
        format!("violations {violations}/200, min slack {tightest:.3e}; |K - cos^2(dt)| max {analytic:.2e}"),
    )
}

fn c11_pvqd_tracking() -> Outcome {
    let circuit = build_ansatz(AnsatzKind::YzCnot, 6, 6, None).unwrap();
    let cfg = PvqdConfig {
        circuit,
        model: TransverseIsing { n_qubits: 6, j: 0.25, h: 1.0 },
        dt: 0.2,
        n_trotter: 10,
        n_train: 20,
        optimizer: OptimizerConfig::new(Method::AGqng, 20).unwrap(),
        target_mode: TargetMode::Exact,
        seed: 5,
    };
    let run = pvqd_run(&cfg).unwrap();
    let mag_err = run
        .steps
        .iter()
        .filter(|s| s.time <= 2.0 + 1e-12)
        .map(|s| (s.magnetization - s.exact_magnetization).abs())
        .fold(0.0, f64::max);
    let last = run.steps.last().unwrap();
    let bound_ok = run.steps.iter().all(|s| s.pre_fidelity >= s.gamma_bound);
    outcome(
        mag_err <= 0.1 && last.fidelity_exact >= 0.9 && bound_ok,
        format!(
            "max |m - m_exact| {mag_err:.3e}; fidelity at t={:.1}: {:.4}; pre-train fidelity >= gamma every step: {bound_ok}",
            last.time, last.fidelity_exact
        ),
    )
}

fn c12_trace_estimator() -> Outcome {
    let c = build_ansatz(AnsatzKind::YzCnot, 8, 8, None).unwrap();
    let dk = 0.5;
    let rows = variance_instances(&c, &[dk], 500, 1212).unwrap();
    let grads: Vec<&[f64]> = rows.iter().map(|r| r.grad.as_slice()).collect();
    let var = pooled_variance(&grads);
    let tr_f = mean(&rows.iter().map(|r| r.trace_f).collect::<Vec<_>>());
    let direct = mean(&rows.iter().map(|r| r.trace_f2).collect::<Vec<_>>());
    let est = estimate_trace_f2(var, 1.0 - dk, 1.0, c.n_params(), tr_f).unwrap();
    let ratio = est / direct;
    outcome(
        (0.5..=2.0).contains(&ratio),
        format!("estimated Tr(F^2) {est:.2}, direct {direct:.2}, ratio {ratio:.3} (need 0.5..2)"),
    )
}

type Check = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(usize, &str, Duration, Check); 12] = [
        (1, "Gaussian one-step exactness", Duration::from_secs(1), c1_gaussian_exactness),
        (2, "QFIM and gradient correctness", Duration::from_secs(10), c2_qfim_correctness),
        (3, "Gaussian kernel", Duration::from_secs(300), c3_gaussian_kernel),
        (4, "gradient variance formula", Duration::from_secs(600), c4_variance_formula),
        (5, "one-step scaling exponents", Duration::from_secs(600), c5_scaling_exponents),
        (6, "GQNG stability in beta", Duration::from_secs(300), c6_gqng_stability),
        (7, "training ordering", Duration::from_secs(1800), c7_training_ordering),
        (8, "adaptive rate near-optimality", Duration::from_secs(300), c8_adaptive_rate),
        (9, "control ordering", Duration::from_secs(3600), c9_control_ordering),
        (10, "time-energy bound", Duration::from_secs(10), c10_time_energy_bound),
        (11, "pVQD tracking", Duration::from_secs(1800), c11_pvqd_tracking),
        (12, "Tr(F^2) estimator", Duration::from_secs(600), c12_trace_estimator),
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (id, name, budget, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = out.pass && in_time;
        println!(
            "criterion {id:>2}: {} [{name}] ({:.1}s of {}s) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
