use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpurify_core::purification::{can_purify_perfectly, delta_bounds, PAIR_TEST_TOL};
use qpurify_core::states::DensityMatrix;
use qpurify_core::{suites, sweep};

/// Parse failures and invalid arguments.
const EXIT_USAGE: u8 = 64;
/// Input files with mismatched dimensions.
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(
    name = "qpurify",
    version,
    about = "Physical purification of quantum states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound curves for the qubit-pair family, written as CSV.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        theta_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Perfect-purifiability verdict and faithfulness bounds for two states.
    /// Exit code 0 = YES, 1 = NO, 2 = UNDETERMINED.
    Check {
        a: PathBuf,
        b: PathBuf,
        /// Prior of the first state.
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long, default_value_t = PAIR_TEST_TOL)]
        tol: f64,
    },
    /// Run a randomized property suite and print its JSON report.
    Proptest {
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// List the available property suites.
    Suites,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn read_state(path: &Path) -> Result<DensityMatrix, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_sweep(theta_min: f64, theta_max: f64, steps: usize, out: &Path) -> ExitCode {
    let rows = match sweep::sweep(theta_min, theta_max, steps) {
        Ok(rows) => rows,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let written = File::create(out).and_then(|f| sweep::write_csv(&rows, BufWriter::new(f)));
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(EXIT_IO, format!("{}: {e}", out.display())),
    }
}

fn run_check(a: &Path, b: &Path, eta: f64, tol: f64) -> ExitCode {
    if !(eta > 0.0 && eta < 1.0) {
        return fail(EXIT_USAGE, format!("--eta must lie in (0, 1), got {eta}"));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return fail(
            EXIT_USAGE,
            format!("--tol must be a non-negative number, got {tol}"),
        );
    }
    let (rho, sigma) = match (read_state(a), read_state(b)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return fail(EXIT_USAGE, e),
    };
    if rho.dim() != sigma.dim() {
        return fail(
            EXIT_DATA,
            format!("dimension mismatch: {} vs {}", rho.dim(), sigma.dim()),
        );
    }
    let result = can_purify_perfectly(&rho, &sigma, tol)
        .and_then(|v| delta_bounds(&rho, &sigma, eta, 1.0 - eta).map(|b| (v, b)));
    let (verdict, bounds) = match result {
        Ok(x) => x,
        Err(e) => return fail(EXIT_DATA, e),
    };
    let mut json = serde_json::to_value(&verdict).expect("verdict serializes");
    json["bounds"] = serde_json::to_value(bounds).expect("bounds serialize");
    println!(
        "{}",
        serde_json::to_string_pretty(&json).expect("value serializes")
    );
    ExitCode::from(verdict.verdict.exit_code() as u8)
}

fn run_proptest(suite: &str, trials: usize, seed: u64, report: Option<&Path>) -> ExitCode {
    let result = match suites::run_suite(suite, trials, seed) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let text = serde_json::to_string_pretty(&result).expect("report serializes");
    println!("{text}");
    if let Some(path) = report {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            return fail(EXIT_IO, format!("{}: {e}", path.display()));
        }
    }
    eprintln!(
        "{}: {} ({} checks, {} failures)",
        result.suite,
        if result.passed { "PASS" } else { "FAIL" },
        result.checks,
        result.failures
    );
    if result.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Sweep {
            theta_min,
            theta_max,
            steps,
            out,
        } => run_sweep(theta_min, theta_max, steps, &out),
        Command::Check { a, b, eta, tol } => run_check(&a, &b, eta, tol),
        Command::Proptest {
            suite,
            trials,
            seed,
            report,
        } => run_proptest(&suite, trials, seed, report.as_deref()),
        Command::Suites => {
            for (name, about) in suites::SUITES {
                println!("{name:<20}{about}");
            }
            ExitCode::SUCCESS
        }
    }
}
