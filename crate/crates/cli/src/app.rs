//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::commands;
use crate::exit;
use crate::scenario::CliError;
use crate::verify;

#[derive(Parser)]
#[command(
    name = "splitci",
    about = "Split covariance intersection fusion: weight optimization, diagnostics, and verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the determinant-minimizing fusion weight for a scenario file
    Optimize {
        /// Scenario JSON (n, P1d, P1i, P2d, P2i)
        input: PathBuf,
        /// Result JSON path
        output: PathBuf,
        /// Boundary clamp: search runs on [delta, 1-delta]
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
        /// Bisection bracket-width tolerance
        #[arg(long = "w-tol", default_value_t = 1e-10)]
        w_tol: f64,
    },
    /// Tabulate the objective and its derivatives across the weight interval
    Sweep {
        /// Scenario JSON
        input: PathBuf,
        /// CSV output path
        output: PathBuf,
        /// Number of equally spaced weights
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Boundary clamp
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
    },
    /// Fuse the two estimates of a scenario (x1 and x2 required)
    Fuse {
        /// Scenario JSON with means
        input: PathBuf,
        /// Result JSON path
        output: PathBuf,
    },
    /// Run the randomized numerical verification suite
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Trials per check
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Matrix dimensions to cycle through
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,8")]
        dims: Vec<usize>,
        /// Report JSON path
        #[arg(long)]
        report: PathBuf,
    },
    /// Simulate two correlated estimate streams and fuse them step by step
    Demo {
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Per-step CSV path
        #[arg(long)]
        output: PathBuf,
    },
}

/// Parse arguments, run the selected command, and return the process exit
/// code (0 ok, 1 verification failure, 2 input error, 3 numerical error).
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                _ => exit::INPUT_ERROR,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Optimize {
            input,
            output,
            delta,
            w_tol,
        } => commands::cmd_optimize(&input, &output, delta, w_tol),
        Command::Sweep {
            input,
            output,
            samples,
            delta,
        } => commands::cmd_sweep(&input, &output, samples, delta),
        Command::Fuse { input, output } => commands::cmd_fuse(&input, &output),
        Command::Verify {
            seed,
            trials,
            dims,
            report,
        } => cmd_verify(seed, trials, &dims, &report),
        Command::Demo {
            steps,
            seed,
            output,
        } => commands::cmd_demo(steps, seed, &output),
    }
}

fn cmd_verify(
    seed: u64,
    trials: usize,
    dims: &[usize],
    report_path: &std::path::Path,
) -> Result<(), CliError> {
    if trials < 1 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    if dims.is_empty() {
        return Err(CliError::Input(
            "--dims must list at least one dimension".into(),
        ));
    }
    if let Some(bad) = dims.iter().find(|&&n| n == 0 || n > 100) {
        return Err(CliError::Input(format!(
            "--dims entries must lie in 1..=100, got {bad}"
        )));
    }
    let report = verify::run_suite(seed, trials, dims);
    std::fs::write(report_path, verify::render_report(&report))
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", report_path.display())))?;
    if report.overall_pass {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}
