use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdflow::flow::Integrator;
use pdflow_cli::{cmd_connectivity, cmd_example, cmd_solve, RunOptions, EXAMPLES};

/// Projected primal-dual flows for convex programs and distributed
/// maximization of graph algebraic connectivity.
///
/// Exit codes: 0 converged, 1 step budget exhausted, 2 input error,
/// 3 divergence.
#[derive(Parser)]
#[command(name = "pdflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a convex program described by a JSON problem file.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Maximize algebraic connectivity over the edge weights of a graph file.
    Connectivity {
        graph: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a built-in example.
    Example {
        #[arg(value_parser = EXAMPLES)]
        name: String,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// Step size (round length for connectivity runs).
    #[arg(long)]
    dt: Option<f64>,
    /// Maximum number of steps or rounds.
    #[arg(long)]
    steps: Option<usize>,
    /// Stop once the residual is at most this value.
    #[arg(long)]
    tol: Option<f64>,
    /// Smoothing parameter (connectivity only).
    #[arg(long)]
    epsilon: Option<f64>,
    /// euler, heun or rk4 (solve only; connectivity rounds are Euler).
    #[arg(long)]
    integrator: Option<Integrator>,
    /// Record every n-th step.
    #[arg(long)]
    record_stride: Option<usize>,
    /// Start from a seeded random point instead of the deterministic default.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for CSV and summary files.
    #[arg(long, short, default_value = "pdflow-out")]
    output: PathBuf,
    /// Worker threads for connectivity rounds.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl From<Flags> for RunOptions {
    fn from(f: Flags) -> Self {
        RunOptions {
            dt: f.dt,
            steps: f.steps,
            tol: f.tol,
            epsilon: f.epsilon,
            integrator: f.integrator,
            record_stride: f.record_stride,
            seed: f.seed,
            output: f.output,
            threads: f.threads,
        }
    }
}

fn main() -> ExitCode {
    let outcome = match Cli::parse().command {
        Command::Solve { problem, flags } => cmd_solve(&problem, &flags.into()),
        Command::Connectivity { graph, flags } => cmd_connectivity(&graph, &flags.into()),
        Command::Example { name, flags } => cmd_example(&name, &flags.into()),
    };
    match outcome {
        Ok(summary) => {
            // A closed pipe must not turn a finished run into a crash.
            let _ = write!(std::io::stdout().lock(), "{summary}");
            ExitCode::from(summary.exit_code())
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
