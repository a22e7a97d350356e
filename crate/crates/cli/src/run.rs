//! Subcommand bodies. Each builds a [`Table`] and writes it out.

use std::error::Error;

use aqng_core::analysis::{binned_log_fidelity, kernel_scan as scan_kernel, variance_scan as scan_variance, OneStepInstance};
use aqng_core::control::{train_control, ControlProblem, ControlProtocol};
use aqng_core::pvqd::{pvqd_run, PvqdConfig, TargetMode, TransverseIsing};
use aqng_core::seed::instance_rng;
use aqng_core::{build_ansatz, optimize::train_circuit, CircuitSpec, OptimizerConfig, TrainTrace};
use rayon::prelude::*;

use crate::table::{num, Table};
use crate::{CircuitArgs, Common, ControlArgs, KernelScanArgs, OptimizerArgs, PvqdArgs, TrainArgs, VarianceScanArgs};

type Res<T> = Result<T, Box<dyn Error>>;

fn echo_common(t: &mut Table, c: &Common) {
    t.echo("seed", c.seed).echo("instances", c.instances);
}

fn circuit(t: &mut Table, a: &CircuitArgs, seed: u64) -> Res<CircuitSpec> {
    t.echo("ansatz", a.ansatz).echo("qubits", a.qubits).echo("layers", a.layers);
    Ok(build_ansatz(a.ansatz, a.qubits, a.layers, Some(seed))?)
}

fn optimizer(t: &mut Table, a: &OptimizerArgs, seed: u64) -> Res<OptimizerConfig> {
    let mut cfg = OptimizerConfig::new(a.optimizer, a.iters)?.with_seed(seed);
    if let Some(b) = a.beta {
        cfg = cfg.with_beta(b)?;
    }
    if let Some(r) = a.reg {
        cfg = cfg.with_reg(r)?;
    }
    if let Some(x) = a.alpha {
        cfg = cfg.with_alpha(x)?;
    }
    t.echo("optimizer", cfg.method)
        .echo("beta", num(cfg.beta))
        .echo("reg", num(cfg.epsilon_r))
        .echo("alpha", num(cfg.fixed_alpha))
        .echo("iters", cfg.iterations);
    Ok(cfg)
}

/// Linear interpolation between closest ranks; `v` must be sorted.
fn percentile(v: &[f64], p: f64) -> f64 {
    let pos = p * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

fn trace_rows(t: &mut Table, traces: &[TrainTrace]) {
    t.block("raw", &["instance", "iteration", "infidelity", "alpha1", "alpha_t", "grad_norm", "step_norm"]);
    for (i, tr) in traces.iter().enumerate() {
        for r in &tr.rows {
            t.row(&[
                i.to_string(),
                r.iteration.to_string(),
                num(r.infidelity),
                num(r.alpha1),
                num(r.alpha_t),
                num(r.grad_norm),
                num(r.step_norm),
            ]);
        }
    }
}

fn trace_summary(t: &mut Table, traces: &[TrainTrace]) {
    t.block("summary", &["iteration", "mean", "median", "p20", "p80"]);
    let n_rows = traces.iter().map(|tr| tr.rows.len()).min().unwrap_or(0);
    for k in 0..n_rows {
        let mut v: Vec<f64> = traces.iter().map(|tr| tr.rows[k].infidelity).collect();
        v.sort_by(f64::total_cmp);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        t.row(&[
            k.to_string(),
            num(mean),
            num(percentile(&v, 0.5)),
            num(percentile(&v, 0.2)),
            num(percentile(&v, 0.8)),
        ]);
    }
}

pub fn kernel_scan(a: &KernelScanArgs) -> Res<()> {
    let mut t = Table::new("kernel-scan");
    echo_common(&mut t, &a.common);
    let c = circuit(&mut t, &a.circuit, a.common.seed)?;
    t.echo("points", a.points).echo("max_norm", num(a.max_norm));
    let samples = scan_kernel(&c, a.common.instances, a.points, a.max_norm, a.common.seed)?;
    t.block("raw", &["instance", "norm", "fidelity"]);
    for s in &samples {
        t.row(&[s.instance.to_string(), num(s.norm), num(s.fidelity)]);
    }
    if a.common.summarize {
        t.block("summary", &["norm", "mean_neg_log_fidelity", "gaussian"]);
        for (x, y) in binned_log_fidelity(&samples) {
            t.row(&[num(x), num(y), num(0.25 * x)]);
        }
    }
    Ok(t.write_to(a.common.out.as_deref())?)
}

pub fn variance_scan(a: &VarianceScanArgs) -> Res<()> {
    let mut t = Table::new("variance-scan");
    echo_common(&mut t, &a.common);
    let c = circuit(&mut t, &a.circuit, a.common.seed)?;
    let list: Vec<String> = a.infidelities.iter().map(|&x| num(x)).collect();
    t.echo("infidelities", list.join(";"));
    let rows = scan_variance(&c, &a.infidelities, a.common.instances, a.common.seed)?;
    t.block(
        "raw",
        &["n_qubits", "m_params", "infidelity", "var_empirical", "var_eq8", "var_eq9", "floor_random"],
    );
    for r in &rows {
        t.row(&[
            r.n_qubits.to_string(),
            r.m_params.to_string(),
            num(r.infidelity),
            num(r.var_empirical),
            num(r.var_predicted),
            num(r.var_lower),
            num(r.floor_random),
        ]);
    }
    if a.common.summarize {
        t.block("summary", &["infidelity", "empirical_over_predicted", "lower_over_predicted"]);
        for r in &rows {
            t.row(&[
                num(r.infidelity),
                num(r.var_empirical / r.var_predicted),
                num(r.var_lower / r.var_predicted),
            ]);
        }
    }
    Ok(t.write_to(a.common.out.as_deref())?)
}

pub fn train(a: &TrainArgs) -> Res<()> {
    let mut t = Table::new("train");
    echo_common(&mut t, &a.common);
    let c = circuit(&mut t, &a.circuit, a.common.seed)?;
    let cfg = optimizer(&mut t, &a.optimizer, a.common.seed)?;
    t.echo("init_infidelity", num(a.init_infidelity)).echo("k0", num(a.k0));
    let traces = (0..a.common.instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(a.common.seed, i as u64);
            let inst = OneStepInstance::sample(&c, a.init_infidelity, a.k0, &mut rng)?;
            train_circuit(&c, &inst.theta, &inst.target, &cfg)
        })
        .collect::<aqng_core::Result<Vec<_>>>()?;
    trace_rows(&mut t, &traces);
    if a.common.summarize {
        trace_summary(&mut t, &traces);
    }
    Ok(t.write_to(a.common.out.as_deref())?)
}

pub fn control(a: &ControlArgs) -> Res<()> {
    let mut t = Table::new("control");
    echo_common(&mut t, &a.common);
    t.echo("qubits", a.qubits)
        .echo("steps", a.steps)
        .echo("dt", num(a.dt))
        .echo("g", num(a.g))
        .echo("target_h", num(a.target_h))
        .echo("target_g", num(a.target_g))
        .echo("periodic", a.periodic)
        .echo("fd_delta", num(a.fd_delta));
    let cfg = optimizer(&mut t, &a.optimizer, a.common.seed)?;
    // Instances run one after another: each gradient is already parallel
    // over protocol parameters.
    let traces = (0..a.common.instances)
        .map(|i| {
            let mut protocol = ControlProtocol::new(a.qubits, a.steps, a.dt, a.g)?;
            protocol.periodic = a.periodic;
            protocol.randomize(&mut instance_rng(a.common.seed, i as u64));
            let problem = ControlProblem::new(protocol, a.target_h, a.target_g)?.with_fd_delta(a.fd_delta)?;
            train_control(&problem, &cfg)
        })
        .collect::<aqng_core::Result<Vec<_>>>()?;
    trace_rows(&mut t, &traces);
    if a.common.summarize {
        trace_summary(&mut t, &traces);
    }
    Ok(t.write_to(a.common.out.as_deref())?)
}

pub fn pvqd(a: &PvqdArgs) -> Res<()> {
    let mut t = Table::new("pvqd");
    t.echo("seed", a.seed);
    let c = circuit(&mut t, &a.circuit, a.seed)?;
    let mode = if a.product_formula { TargetMode::ProductFormula } else { TargetMode::Exact };
    t.echo("dt", num(a.dt))
        .echo("trotter_steps", a.trotter_steps)
        .echo("train_iters", a.train_iters)
        .echo("J", num(a.j))
        .echo("h", num(a.h))
        .echo("optimizer", a.optimizer)
        .echo("target", if a.product_formula { "product-formula" } else { "exact" });
    let config = PvqdConfig {
        model: TransverseIsing {
            n_qubits: c.n_qubits,
            j: a.j,
            h: a.h,
        },
        circuit: c,
        dt: a.dt,
        n_trotter: a.trotter_steps,
        n_train: a.train_iters,
        optimizer: OptimizerConfig::new(a.optimizer, a.train_iters)?,
        target_mode: mode,
        seed: a.seed,
    };
    let run = pvqd_run(&config)?;
    for s in run.steps.iter().filter_map(|s| s.error.as_ref().map(|e| (s.step, e))) {
        eprintln!("warning: training failed at step {}: {}", s.0, s.1);
    }
    t.block("raw", &["step", "time", "fidelity_exact", "magnetization", "final_loss", "gamma_bound"]);
    for s in &run.steps {
        t.row(&[
            s.step.to_string(),
            num(s.time),
            num(s.fidelity_exact),
            num(s.magnetization),
            num(s.final_loss),
            num(s.gamma_bound),
        ]);
    }
    if a.summarize {
        t.block("summary", &["step", "exact_magnetization", "pre_fidelity", "bound_holds"]);
        for s in &run.steps {
            t.row(&[
                s.step.to_string(),
                num(s.exact_magnetization),
                num(s.pre_fidelity),
                (s.pre_fidelity >= s.gamma_bound).to_string(),
            ]);
        }
    }
    Ok(t.write_to(a.out.as_deref())?)
}
