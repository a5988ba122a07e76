//! Command-line front end: generating functions, QA and truncated-GGE
//! solves, identity verification and convergence scans.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::SolverArgs;

#[derive(Parser, Debug)]
#[command(name = "xxz-gge", version, about = "Quasi-local GGE and quench-action steady states of the XXZ chain")]
struct Cli {
    /// Only report errors
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    /// Also print iteration histories and diagnostics
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the Neel generating function Omega_s on the rapidity grid
    Omega {
        #[arg(long)]
        delta: f64,
        /// Twice the auxiliary spin
        #[arg(long)]
        twos: usize,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the quench-action GTBA for the Neel state
    QaSolve {
        #[arg(long)]
        delta: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the truncated quasi-local GGE
    GgeSolve {
        #[arg(long)]
        delta: f64,
        /// Twice the largest auxiliary spin included
        #[arg(long)]
        sbar: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// Start from a previously saved state
        #[arg(long)]
        seed: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the hole densities of a QA solve against the generating functions
    VerifyIdentity {
        #[arg(long)]
        delta: f64,
        /// Values of 2s to check, comma separated
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        smax: Vec<usize>,
        #[arg(long, default_value_t = 1e-6)]
        threshold: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Distance between truncated-GGE and QA states over anisotropies and truncations
    Scan {
        #[arg(long, value_delimiter = ',', required = true)]
        delta_list: Vec<f64>,
        /// Values of 2 s_bar, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        sbar_list: Vec<usize>,
        #[arg(long, default_value_t = xxz_gge::solvers::DEFAULT_REPORT_LEVELS)]
        report_levels: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two saved states level by level
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = xxz_gge::solvers::DEFAULT_REPORT_LEVELS)]
        report_levels: usize,
        /// Per-level distances as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Diagnostics on stderr, filtered by `--quiet` and `--verbose`.
pub struct Log {
    level: u8,
}

impl Log {
    pub fn info(&self, msg: &str) {
        if self.level >= 1 {
            eprintln!("{msg}");
        }
    }

    pub fn debug(&self, msg: &str) {
        if self.level >= 2 {
            eprintln!("{msg}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let log = Log { level: if cli.quiet { 0 } else if cli.verbose { 2 } else { 1 } };
    let result = match &cli.command {
        Command::Omega { delta, twos, grid, out } => commands::omega(*delta, *twos, *grid, out, &log),
        Command::QaSolve { delta, solver, out } => commands::qa_solve(*delta, solver, out, &log),
        Command::GgeSolve { delta, sbar, solver, seed, out } => {
            commands::gge_solve(*delta, *sbar, solver, seed.as_deref(), out, &log)
        }
        Command::VerifyIdentity { delta, smax, threshold, solver, out } => {
            commands::verify_identity(*delta, smax, *threshold, solver, out, &log)
        }
        Command::Scan { delta_list, sbar_list, report_levels, solver, out } => {
            commands::scan(delta_list, sbar_list, *report_levels, solver, out, &log)
        }
        Command::Compare { a, b, report_levels, out } => commands::compare(a, b, *report_levels, out.as_ref(), &log),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
