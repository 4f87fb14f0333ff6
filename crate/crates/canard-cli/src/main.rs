//! `canard` — command-line toolkit for detecting and characterizing canard
//! solutions in slow-fast systems with one fast variable.
//!
//! Subcommands:
//! * `analyze`  — locate pseudo-singular points and run both canard criteria,
//!   emitting a deterministic JSON report;
//! * `simulate` — integrate the full stiff system, emitting a trajectory CSV,
//!   a gnuplot script, and canard metrics;
//! * `sweep`    — run either of the above across a list of parameter values,
//!   in parallel, with a deterministic summary.
//!
//! Exit codes: 0 success, 1 numerical failure (partial results were still
//! written), 2 usage or model error.

mod analyze;
mod model;
mod simulate;
mod sweep;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "canard",
    version,
    about = "Detect and characterize canard solutions in slow-fast systems",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate pseudo-singular points and run both canard criteria.
    Analyze(AnalyzeArgs),
    /// Integrate the full system; write a CSV trajectory and a plot script.
    Simulate(SimulateArgs),
    /// Repeat an analysis or simulation across parameter values.
    Sweep(SweepArgs),
}

/// Model selection shared by every subcommand.
#[derive(Args, Clone)]
pub struct ModelArgs {
    /// Built-in model: `chua3` or `chua4` (reference parameters).
    #[arg(long, value_name = "NAME", conflicts_with = "model")]
    pub builtin: Option<String>,

    /// TOML model file (see docs/MODEL_FORMAT.md).
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,

    /// Parameter override, repeatable: --param alpha=0.3
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,

    /// Override the singular perturbation parameter ε.
    #[arg(long, value_name = "EPS")]
    pub epsilon: Option<f64>,
}

/// Search-space flags shared by `analyze` and `sweep`.
#[derive(Args, Clone)]
pub struct SearchArgs {
    /// Search interval per variable, repeatable: --box z=-2:2
    /// (default: [-2, 2] for every variable).
    #[arg(long = "box", value_name = "VAR=LO:HI")]
    pub boxes: Vec<String>,

    /// Seed-grid resolution per axis.
    #[arg(long, default_value_t = 10)]
    pub grid: usize,
}

/// Integration flags shared by `simulate` and `sweep`.
#[derive(Args, Clone)]
pub struct SolverArgs {
    /// Initial full-space point `v1,v2,...`, or `auto` to start on the
    /// attracting branch of a built-in model.
    #[arg(long, default_value = "auto", value_name = "POINT|auto", allow_hyphen_values = true)]
    pub x0: String,

    /// Recorded span in slow time: `T` (from 0) or `T0:T1`.
    #[arg(
        long = "t-span",
        default_value = "60",
        value_name = "T|T0:T1",
        allow_hyphen_values = true
    )]
    pub t_span: String,

    /// Transient discarded before recording (slow-time units).
    /// Default: 20 with `--x0 auto`, otherwise 0.
    #[arg(long, value_name = "T")]
    pub transient: Option<f64>,

    /// Relative tolerance of the adaptive solver.
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,

    /// Absolute tolerance of the adaptive solver.
    #[arg(long, default_value_t = 1e-11)]
    pub abs_tol: f64,

    /// Maximum step size (slow-time units).
    #[arg(long, default_value_t = 1e-2)]
    pub max_step: f64,

    /// Use fixed-step classical RK4 with this step instead of the adaptive
    /// solver (byte-identical reruns).
    #[arg(long, value_name = "H")]
    pub fixed_step: Option<f64>,

    /// Resample the trajectory at this many uniformly spaced times
    /// (default: one sample per accepted step).
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,

    /// Branch-membership half-width η for the canard metrics.
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,

    /// Fold point `v1,v2,...` for the closest-approach metric
    /// (default: located by a pseudo-singular search).
    #[arg(long = "m-point", value_name = "POINT", allow_hyphen_values = true)]
    pub m_point: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Write the JSON report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output path stem: writes `<out>.csv` and `<out>.plot`.
    #[arg(long, default_value = "trajectory", value_name = "STEM")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Analyze,
    Simulate,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Parameter to sweep.
    #[arg(long = "sweep", value_name = "NAME")]
    sweep: String,
    /// Comma-separated parameter values (tokens name the output dirs).
    #[arg(
        long,
        value_delimiter = ',',
        value_name = "V1,V2,...",
        allow_hyphen_values = true
    )]
    values: Vec<String>,
    /// What to run at each value.
    #[arg(long, value_enum, default_value = "analyze")]
    mode: SweepMode,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Directory receiving one subdirectory per value plus `summary.json`.
    #[arg(long = "out-dir", value_name = "DIR")]
    out_dir: PathBuf,
}

/// Print a line to stdout, treating a closed pipe (e.g. `| head`) as
/// success rather than a panic.
pub fn emit_stdout(text: &str) -> canard_core::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(e.into()),
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => analyze::run(&args.model, &args.search, args.out.as_deref()),
        Command::Simulate(args) => simulate::run(&args.model, &args.solver, &args.out),
        Command::Sweep(args) => sweep::run(&args),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(if e.is_usage_error() { 2 } else { 1 });
        }
    }
}
