//! CLI for principal p-Laplacian eigenvalues on weighted rooted trees.
//!
//! Exit codes: 0 success, 1 property failure, 2 input error,
//! 3 non-convergence.

mod commands;
mod document;
mod report;
mod testfn;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    pub fn failure(message: impl ToString) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }

    pub fn non_convergence(message: impl ToString) -> Self {
        Self {
            code: 3,
            message: message.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "plaptree",
    version,
    about = "Two-sided bounds and high-precision values of the principal Dirichlet eigenvalue of the discrete p-Laplacian on finite weighted rooted trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Geometric two-sided bounds, optionally sharpened by a test function.
    Bounds {
        /// Tree document (JSON).
        input: PathBuf,
        /// Override the document's exponent.
        #[arg(long)]
        p: Option<f64>,
        /// JSON file with a test function, its domain tag, and cutoff.
        #[arg(long)]
        test_function: Option<PathBuf>,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// High-precision eigenvalue and eigenfunction via the certified
    /// inverse iteration, cross-checked by gradient descent.
    Solve {
        input: PathBuf,
        #[arg(long)]
        p: Option<f64>,
        /// Interval convergence tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        /// Also list the truncation eigenvalues for every level.
        #[arg(long)]
        sequence: bool,
        #[arg(long)]
        json: bool,
    },
    /// Write a homogeneous-tree document (geometrically decaying weights).
    Generate {
        /// Branching factor, depth, decay t in (0, 1/r), edge scale a.
        #[arg(long, num_args = 4, value_names = ["R", "N", "T", "A"])]
        homogeneous: Vec<f64>,
        /// Exponent stored in the document (default 2).
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run a verification suite against the document's tree.
    Verify {
        input: PathBuf,
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
}

/// identities: summation by parts; sandwich: bounds enclose the eigenvalue;
/// equalities: functionals at the eigenpair; lemma21: eigenfunction
/// monotonicity; lemma31: truncation limit.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Suite {
    Identities,
    Sandwich,
    Equalities,
    Lemma21,
    Lemma31,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, json) = match &cli.command {
        Command::Bounds {
            input,
            p,
            test_function,
            json,
        } => (
            commands::cmd_bounds(input, *p, test_function.as_deref()),
            *json,
        ),
        Command::Solve {
            input,
            p,
            tol,
            max_iters,
            sequence,
            json,
        } => (
            commands::cmd_solve(input, *p, *tol, *max_iters, *sequence),
            *json,
        ),
        Command::Generate {
            homogeneous,
            p,
            out,
            json,
        } => (commands::cmd_generate(homogeneous, *p, out), *json),
        Command::Verify {
            input,
            suite,
            p,
            tol,
            json,
        } => (commands::cmd_verify(input, *suite, *p, *tol), *json),
    };
    match outcome {
        Ok(outcome) => {
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.report)
                        .expect("report serializes")
                );
            } else {
                print!("{}", outcome.report.render_human());
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
