//! `aqng`: seeded experiment runner. Every subcommand writes a CSV table
//! headed by `# key=value` lines that echo the full configuration.

mod run;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use aqng_core::{AnsatzKind, Method};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "aqng", version, about = "Adaptive quantum natural gradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fidelity against metric distance from random targets.
    KernelScan(KernelScanArgs),
    /// Gradient variance at fixed infidelity next to its prediction.
    VarianceScan(VarianceScanArgs),
    /// Train circuits towards random targets.
    Train(TrainArgs),
    /// Optimize piecewise-constant control protocols.
    Control(ControlArgs),
    /// Projected variational dynamics of a transverse-field Ising chain.
    Pvqd(PvqdArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10, value_parser = positive_usize)]
    pub instances: usize,
    /// Output file; standard output if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_parser = positive_usize)]
    pub threads: Option<usize>,
    /// Append an aggregate block after the raw rows.
    #[arg(long)]
    pub summarize: bool,
}

#[derive(Debug, Args)]
pub struct CircuitArgs {
    #[arg(long, default_value = "yz-cnot", value_parser = ansatz)]
    pub ansatz: AnsatzKind,
    #[arg(long, default_value_t = 6, value_parser = qubits)]
    pub qubits: usize,
    #[arg(long, default_value_t = 6, value_parser = positive_usize)]
    pub layers: usize,
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    #[arg(long, default_value = "a-qng", value_parser = optimizer)]
    pub optimizer: Method,
    /// GQNG exponent; the optimizer's default if omitted.
    #[arg(long, value_parser = unit_interval)]
    pub beta: Option<f64>,
    /// Metric regularization; the optimizer's default if omitted.
    #[arg(long, value_parser = non_negative)]
    pub reg: Option<f64>,
    /// Fixed learning rate for s-qng and adam.
    #[arg(long, value_parser = positive)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 20, value_parser = positive_usize)]
    pub iters: usize,
}

#[derive(Debug, Args)]
pub struct KernelScanArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub circuit: CircuitArgs,
    /// Grid points per instance, from zero to `--max-norm`.
    #[arg(long, default_value_t = 21, value_parser = at_least_two)]
    pub points: usize,
    /// Largest `ΔθᵀFΔθ` on the grid.
    #[arg(long, default_value_t = 4.0, value_parser = positive)]
    pub max_norm: f64,
}

#[derive(Debug, Args)]
pub struct VarianceScanArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub circuit: CircuitArgs,
    /// Comma-separated infidelities, each in (0, 1).
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9", value_parser = open_unit)]
    pub infidelities: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub circuit: CircuitArgs,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// Initial infidelity to the target.
    #[arg(long, default_value_t = 0.9, value_parser = open_unit)]
    pub init_infidelity: f64,
    /// Best fidelity the circuit can reach; below 1 the target lies
    /// partly outside the circuit's state manifold.
    #[arg(long, default_value_t = 1.0, value_parser = fidelity_cap)]
    pub k0: f64,
}

#[derive(Debug, Args)]
pub struct ControlArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[arg(long, default_value_t = 6, value_parser = qubits)]
    pub qubits: usize,
    /// Number of piecewise-constant control steps.
    #[arg(long, default_value_t = 16, value_parser = positive_usize)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    pub dt: f64,
    /// Transverse field during the protocol.
    #[arg(long, default_value_t = 1.0, value_parser = finite)]
    pub g: f64,
    /// Longitudinal field of the target Hamiltonian.
    #[arg(long, default_value_t = 1.0, value_parser = finite)]
    pub target_h: f64,
    /// Transverse field of the target Hamiltonian.
    #[arg(long, default_value_t = 1.0, value_parser = finite)]
    pub target_g: f64,
    /// Close the coupling chain into a ring.
    #[arg(long)]
    pub periodic: bool,
    /// Step of the central differences used for gradients.
    #[arg(long, default_value_t = 1e-5, value_parser = positive)]
    pub fd_delta: f64,
}

#[derive(Debug, Args)]
pub struct PvqdArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_parser = positive_usize)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub summarize: bool,
    #[command(flatten)]
    pub circuit: CircuitArgs,
    #[arg(long, default_value_t = 0.2, value_parser = positive)]
    pub dt: f64,
    #[arg(long, default_value_t = 10, value_parser = positive_usize)]
    pub trotter_steps: usize,
    #[arg(long, default_value_t = 20, value_parser = positive_usize)]
    pub train_iters: usize,
    /// ZZ coupling.
    #[arg(long = "J", default_value_t = 0.25, value_parser = finite)]
    pub j: f64,
    /// Transverse field.
    #[arg(long = "h", default_value_t = 1.0, value_parser = finite)]
    pub h: f64,
    #[arg(long, default_value = "a-gqng", value_parser = optimizer)]
    pub optimizer: Method,
    /// Train towards the first-order product formula instead of the exact
    /// propagator.
    #[arg(long)]
    pub product_formula: bool,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"))
}

fn finite(s: &str) -> Result<f64, String> {
    let x = parse_f64(s)?;
    x.is_finite().then_some(x).ok_or_else(|| format!("'{s}' is not finite"))
}

fn positive(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    (x > 0.0).then_some(x).ok_or_else(|| format!("must be positive, got {s}"))
}

fn non_negative(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    (x >= 0.0).then_some(x).ok_or_else(|| format!("must be >= 0, got {s}"))
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    (0.0..=1.0).contains(&x).then_some(x).ok_or_else(|| format!("must lie in [0, 1], got {s}"))
}

fn open_unit(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    (x > 0.0 && x < 1.0).then_some(x).ok_or_else(|| format!("must lie in (0, 1), got {s}"))
}

fn fidelity_cap(s: &str) -> Result<f64, String> {
    let x = finite(s)?;
    (x > 0.0 && x <= 1.0).then_some(x).ok_or_else(|| format!("must lie in (0, 1], got {s}"))
}

fn usize_at_least(s: &str, min: usize) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("'{s}': {e}"))?;
    (n >= min).then_some(n).ok_or_else(|| format!("must be at least {min}, got {n}"))
}

fn positive_usize(s: &str) -> Result<usize, String> {
    usize_at_least(s, 1)
}

fn at_least_two(s: &str) -> Result<usize, String> {
    usize_at_least(s, 2)
}

/// Statevectors beyond 20 qubits are out of reach for dense simulation.
fn qubits(s: &str) -> Result<usize, String> {
    let n = usize_at_least(s, 2)?;
    (n <= 20).then_some(n).ok_or_else(|| format!("at most 20 qubits are supported, got {n}"))
}

fn ansatz(s: &str) -> Result<AnsatzKind, String> {
    s.parse().map_err(|e: aqng_core::Error| e.to_string())
}

fn optimizer(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: aqng_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match &cli.command {
        Command::KernelScan(a) => a.common.threads,
        Command::VarianceScan(a) => a.common.threads,
        Command::Train(a) => a.common.threads,
        Command::Control(a) => a.common.threads,
        Command::Pvqd(a) => a.threads,
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::KernelScan(a) => run::kernel_scan(a),
        Command::VarianceScan(a) => run::variance_scan(a),
        Command::Train(a) => run::train(a),
        Command::Control(a) => run::control(a),
        Command::Pvqd(a) => run::pvqd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
