//! `lipfit`: generate data, train models, evaluate bounds, simulate, and tabulate.
//!
//! Exit codes: 0 success, 2 configuration error, 3 training divergence,
//! 4 I/O failure, 1 anything else.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "lipfit", version, about = "Lipschitz-minimal interpolation with certified networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write train/test CSVs and a manifest with L_data and the covering radius.
    GenData(GenDataArgs),
    /// Train one model (or an MLP weight-decay sweep) and store checkpoint, report, and metrics.
    Train(TrainArgs),
    /// Evaluate a trained run, a checkpoint, or the interpolation oracle.
    Eval(EvalArgs),
    /// Print a JSON report of the generalization bounds.
    Bounds(BoundsArgs),
    /// Simulate trained vector fields against the benchmark system.
    Simulate(SimulateArgs),
    /// Collect runs into CSV tables and an SVG error plot.
    Report(ReportArgs),
    /// Describe a checkpoint.
    Info(InfoArgs),
    /// Print an example configuration.
    InitConfig,
}

#[derive(Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub test_count: Option<usize>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// `lipnet` or `mlp`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub activation: Option<String>,
    /// `P1`, `P2`, or `P3`.
    #[arg(long)]
    pub formulation: Option<String>,
    #[arg(long, conflicts_with = "rho_rel")]
    pub rho: Option<f64>,
    /// ρ as a multiple of L_data.
    #[arg(long)]
    pub rho_rel: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Train the MLP once per weight decay in 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1, 5.
    #[arg(long)]
    pub wd_sweep: bool,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub inner_steps: Option<usize>,
    #[arg(long)]
    pub outer_iters: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory name; derived from the model settings when omitted.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Re-evaluate `runs/<RUN>` and rewrite its metrics.
    #[arg(long, conflicts_with_all = ["checkpoint", "model"])]
    pub run: Option<String>,
    #[arg(long, conflicts_with = "model")]
    pub checkpoint: Option<PathBuf>,
    /// `mcshane` evaluates the minimal-Lipschitz interpolant of the training data.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Args)]
pub struct BoundsArgs {
    /// JSON file with bound inputs; flags override its fields.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
    /// Take L_data and h from the manifest of this experiment.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Take l_f from the certificate of `runs/<RUN>` (requires --config).
    #[arg(long, requires = "config")]
    pub run: Option<String>,
    #[arg(long)]
    pub l_g: Option<f64>,
    #[arg(long)]
    pub l_data: Option<f64>,
    #[arg(long)]
    pub l_f: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub dist: Option<f64>,
    #[arg(long)]
    pub eps_bar: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub big_n: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub k2: Option<f64>,
    /// Calibrate k1, k2 for this dimension instead of evaluating bounds.
    #[arg(long)]
    pub calibrate: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "100,300,1000,3000,10000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Run names under `runs/`; use `mcshane` for the interpolation oracle.
    #[arg(long = "run", required = true)]
    pub runs: Vec<String>,
    #[arg(long)]
    pub initial_conditions: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Experiment output directory (the config's `output_dir`).
    #[arg(long)]
    pub dir: PathBuf,
}

#[derive(Args)]
pub struct InfoArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Self { code: 2, message: msg.into() }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Self { code: 4, message: msg.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<lipfit::Error> for Failure {
    fn from(e: lipfit::Error) -> Self {
        use lipfit::Error as E;
        let code = match &e {
            E::Divergence { .. } => 3,
            E::Io(_) => 4,
            E::Argument(_) | E::Format(_) | E::Json(_) | E::Domain(_) => 2,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(a) => commands::gen_data(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Bounds(a) => commands::bounds(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Report(a) => commands::report(&a),
        Command::Info(a) => commands::info(&a),
        Command::InitConfig => commands::init_config(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
