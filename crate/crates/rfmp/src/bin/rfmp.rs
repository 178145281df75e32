//! Batch front end: `solve`, `verify`, and `diagnose` over problem files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rfmp::io::{self, CommandError, VerifyOracle};
use rfmp::RfmpConfig;

#[derive(Parser)]
#[command(
    name = "rfmp",
    version,
    about = "Greedy regularized matching-pursuit solver for finite-data linear inverse problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverFlags {
    /// Regularization parameter lambda (nonnegative).
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Repetition cap: maximum number of times one atom may be chosen.
    #[arg(long, default_value_t = 1000)]
    cap: u32,
    /// Iteration limit.
    #[arg(long = "max-iter", default_value_t = 10_000)]
    max_iter: usize,
    /// Halt when the next step coefficient falls below this magnitude.
    #[arg(long = "alpha-tol")]
    alpha_tol: Option<f64>,
    /// Halt when the next energy decrease is at or below this value
    /// (default 0: stop on exactly zero progress).
    #[arg(long = "energy-tol")]
    energy_tol: Option<f64>,
}

impl SolverFlags {
    fn config(&self) -> RfmpConfig {
        RfmpConfig {
            lambda: self.lambda,
            repetition_cap: self.cap,
            max_iterations: self.max_iter,
            stop_alpha_tol: self.alpha_tol,
            stop_energy_tol: Some(self.energy_tol.unwrap_or(0.0)),
            ..RfmpConfig::default()
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum OracleArg {
    /// Compare against the regularized normal-equation solution (lambda > 0).
    Tikhonov,
    /// Compare the image against the range projection of the data (lambda = 0).
    Range,
    /// Compare against the solution projected onto singular-vector indices.
    Subspace,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver on a problem file; write run log and solution.
    Solve {
        /// Path to the problem file.
        problem: PathBuf,
        #[command(flatten)]
        flags: SolverFlags,
        /// Output directory for run_log.csv and solution.txt.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the solver and compare the result against a direct-solve oracle.
    Verify {
        /// Path to the problem file.
        problem: PathBuf,
        #[command(flatten)]
        flags: SolverFlags,
        /// Which limit object to compare against.
        #[arg(long, value_enum)]
        oracle: OracleArg,
        /// Zero-based singular-vector indices spanning the subspace
        /// (required for --oracle subspace).
        #[arg(long = "subspace-indices", value_delimiter = ',')]
        subspace_indices: Option<Vec<usize>>,
        /// Pass/fail threshold for every reported deviation.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Print dictionary diagnostics (c1, c2, semi-frame constant) at lambda.
    Diagnose {
        /// Path to the problem file.
        problem: PathBuf,
        /// Regularization parameter the diagnostics are evaluated at.
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
    },
}

fn fail(err: CommandError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(err.exit_code() as u8)
}

fn run_solve(problem: PathBuf, flags: SolverFlags, out: PathBuf) -> ExitCode {
    match io::run_solve(&problem, &flags.config(), &out) {
        Ok(artifacts) => {
            let state = &artifacts.outcome.state;
            println!(
                "termination: {} after {} iterations",
                artifacts.outcome.reason,
                state.iteration()
            );
            println!(
                "energy: {:.6e} (from {:.6e}), residual norm {:.6e}",
                state.energy(),
                state.initial_energy(),
                state.residual().norm()
            );
            println!(
                "diagnostics: c1 = {:.6e}, c2 = {:.6e}, semi_frame_c = {:.6e}",
                artifacts.diagnostics.c1,
                artifacts.diagnostics.c2,
                artifacts.diagnostics.semi_frame_c
            );
            println!("wrote {}", artifacts.log_path.display());
            println!("wrote {}", artifacts.solution_path.display());
            ExitCode::SUCCESS
        }
        Err(err) => fail(err),
    }
}

fn run_verify(
    problem: PathBuf,
    flags: SolverFlags,
    oracle: OracleArg,
    subspace_indices: Option<Vec<usize>>,
    tolerance: f64,
) -> ExitCode {
    let oracle = match oracle {
        OracleArg::Tikhonov => VerifyOracle::Tikhonov,
        OracleArg::Range => VerifyOracle::Range,
        OracleArg::Subspace => match subspace_indices {
            Some(indices) => VerifyOracle::Subspace { indices },
            None => {
                eprintln!("error: --oracle subspace requires --subspace-indices");
                return ExitCode::from(3);
            }
        },
    };
    match io::run_verify(&problem, &flags.config(), &oracle, tolerance) {
        Ok(report) => {
            println!(
                "termination: {} after {} iterations",
                report.reason, report.iterations
            );
            for check in &report.checks {
                println!(
                    "{}: {:.6e} (tolerance {:.1e}) {}",
                    check.name,
                    check.value,
                    check.tolerance,
                    if check.passed { "PASS" } else { "FAIL" }
                );
            }
            for note in &report.notes {
                println!("note: {note}");
            }
            if report.passed() {
                println!("overall: PASS");
                ExitCode::SUCCESS
            } else {
                println!("overall: FAIL");
                ExitCode::from(1)
            }
        }
        Err(err) => fail(err),
    }
}

fn run_diagnose(problem: PathBuf, lambda: f64) -> ExitCode {
    match io::run_diagnose(&problem, lambda) {
        Ok(report) => {
            let d = &report.diagnostics;
            println!(
                "atoms: {}, space dimension: {}",
                report.atom_count, report.space_dim
            );
            println!("lambda: {:.6e}", d.lambda_used);
            println!("c1: {:.6e} (atom {})", d.c1, d.c1_atom);
            println!("c2: {:.6e} (atom {})", d.c2, d.c2_atom);
            println!("semi_frame_c: {:.6e}", d.semi_frame_c);
            println!("span_rank: {}", d.span_rank);
            if d.span_rank < report.space_dim {
                println!(
                    "warning: atoms span only {} of {} dimensions; limits restricted to that subspace",
                    d.span_rank, report.space_dim
                );
            }
            if !report.collinear_pairs.is_empty() {
                println!(
                    "warning: {} collinear atom pair(s), e.g. {:?}; semi-frame constant degenerates",
                    report.collinear_pairs.len(),
                    &report.collinear_pairs[..report.collinear_pairs.len().min(5)]
                );
            }
            match &report.gate_message {
                None => println!("hypothesis gate: PASS (c1 > 0)"),
                Some(msg) => println!("hypothesis gate: FAIL ({msg})"),
            }
            ExitCode::SUCCESS
        }
        Err(err) => fail(err),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    match cli.command {
        Command::Solve {
            problem,
            flags,
            out,
        } => run_solve(problem, flags, out),
        Command::Verify {
            problem,
            flags,
            oracle,
            subspace_indices,
            tolerance,
        } => run_verify(problem, flags, oracle, subspace_indices, tolerance),
        Command::Diagnose { problem, lambda } => run_diagnose(problem, lambda),
    }
}
