//! `irb`: decompose states, certify generators and simulate IRB-selective
//! dephasing from the command line.

mod commands;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use irb_core::diagnostics::{DiagnosticOptions, DEFAULT_LAMBDA};
use irb_core::dynamics::DEFAULT_SELECTIVITY_TOL;
use irb_core::irb::{DEFAULT_DELTA_DEGEN, DEFAULT_DELTA_SUPPORT};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "irb", version, about = "Intrinsic reference basis decomposition and selective dephasing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    tol: Tolerances,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Tolerances {
    /// Populations at or below this are outside the active support.
    #[arg(long, global = true, default_value_t = DEFAULT_DELTA_SUPPORT)]
    pub delta_support: f64,
    /// Populations closer than this share a degenerate block.
    #[arg(long, global = true, default_value_t = DEFAULT_DELTA_DEGEN)]
    pub delta_degen: f64,
    /// Commutator-norm tolerance of the selectivity test.
    #[arg(long, global = true, default_value_t = DEFAULT_SELECTIVITY_TOL)]
    pub sel_tol: f64,
    /// Weight of the cohesion deficit in the arrow functional.
    #[arg(long, global = true, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    /// Report entropic quantities in bits instead of nats.
    #[arg(long, global = true)]
    pub bits: bool,
}

impl Tolerances {
    pub fn options(&self) -> DiagnosticOptions<f64> {
        DiagnosticOptions { lambda: self.lambda, delta_support: self.delta_support, delta_degen: self.delta_degen }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, clap::Args)]
pub struct TimeGrid {
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    /// End of the grid; `tcl-scan` picks one from the rates when omitted.
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Engine::Analytic)]
    pub engine: Engine,
    /// Largest RK4 step of the numeric engine.
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the IRB of a state and evaluate its diagnostics.
    Decompose {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Propagate a state and write per-sample diagnostics as CSV.
    Evolve {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        gen: PathBuf,
        #[command(flatten)]
        grid: TimeGrid,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether a generator is selective in the IRB of a state.
    Certify {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        gen: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classicalization times for a list of thresholds.
    TclScan {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        gen: PathBuf,
        /// Comma-separated thresholds in (0, 1).
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[command(flatten)]
        grid: TimeGrid,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Data for the qubit classicalization figure.
    Fig2 {
        /// Directory receiving `fig2_panel_a.csv` and `fig2_panel_b.csv`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Ginibre random state.
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let tol = &cli.tol;
    match cli.command {
        Command::Decompose { state, out } => commands::decompose(&state, out.as_deref(), tol),
        Command::Evolve { state, gen, grid, out } => commands::evolve(&state, &gen, &grid, out.as_deref(), tol),
        Command::Certify { state, gen, out } => commands::certify(&state, &gen, out.as_deref(), tol),
        Command::TclScan { state, gen, eps, grid, out } => {
            commands::tcl_scan(&state, &gen, &eps, &grid, out.as_deref(), tol)
        }
        Command::Fig2 { out } => commands::fig2(&out),
        Command::Random { dim, seed, out } => commands::random(dim, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}: {e}", e.kind());
            ExitCode::from(e.exit_code())
        }
    }
}
