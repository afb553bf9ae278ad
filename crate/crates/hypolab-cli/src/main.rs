//! Command-line driver for the hypolab experiment suite.
//!
//! One experiment per invocation.  Exit codes: 0 all checks pass, 1 a check
//! failed, 2 configuration/usage error, 3 assumption violation, 4 numerical
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypolab::config::ExperimentConfig;
use hypolab::experiment::{run, RunOutput};
use hypolab::report::{compare, ExperimentReport};
use hypolab::rng::run_with_threads;
use hypolab::Error;

#[derive(Parser)]
#[command(name = "hypolab", version, about = "Numerical laboratory for decay rates of degenerate diffusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long, env = "HYPOLAB_CONFIG")]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long, env = "HYPOLAB_SEED")]
    seed: Option<u64>,
    /// Output directory for the report and CSV tables.
    #[arg(long, env = "HYPOLAB_OUT")]
    out: Option<PathBuf>,
    /// Worker thread count (defaults to all cores).
    #[arg(long, env = "HYPOLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Decay-envelope tables: numeric inversion vs closed forms.
    Rates(RunArgs),
    /// Monte Carlo variance decay along the SDE.
    Simulate(RunArgs),
    /// Discretized-generator identity and decay checks.
    OperatorLab(RunArgs),
    /// Growth/boundedness certificates for configured potentials.
    CheckAssumptions(RunArgs),
    /// Tolerance-aware diff of two experiment reports.
    Compare {
        /// Baseline report (JSON).
        a: PathBuf,
        /// Candidate report (JSON).
        b: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Rates(args) => run_experiment(&args, "rates"),
        Command::Simulate(args) => run_experiment(&args, "simulate"),
        Command::OperatorLab(args) => run_experiment(&args, "operator-lab"),
        Command::CheckAssumptions(args) => run_experiment(&args, "check-assumptions"),
        Command::Compare { a, b } => run_compare(&a, &b),
    }
}

fn run_experiment(args: &RunArgs, expected_kind: &str) -> ExitCode {
    let mut config = match load_config(&args.config, expected_kind) {
        Ok(config) => config,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out_dir = args.out.clone().or_else(|| config.out.as_ref().map(PathBuf::from));

    let result = run_with_threads(args.threads, || run(&config));
    let output = match result {
        Ok(output) => output,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(error_code(&err));
        }
    };
    print_summary(&output.report);
    if let Some(dir) = out_dir {
        if let Err(err) = write_outputs(&dir, &output) {
            eprintln!("error writing outputs: {err}");
            return ExitCode::from(4);
        }
        println!("wrote {}", dir.join("report.json").display());
    }
    if output.report.pass {
        ExitCode::SUCCESS
    } else if expected_kind == "check-assumptions" {
        // A failed certificate is an assumption violation.
        ExitCode::from(3)
    } else {
        ExitCode::from(1)
    }
}

fn load_config(path: &Path, expected_kind: &str) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let config = ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?;
    if config.kind() != expected_kind {
        return Err(format!(
            "config kind {:?} does not match subcommand {:?}",
            config.kind(),
            expected_kind
        ));
    }
    Ok(config)
}

fn error_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) | Error::KindMismatch { .. } => 2,
        Error::AssumptionViolated(_) | Error::DivergentIntegral(_) | Error::ObservableContract { .. } => 3,
        _ => 4,
    }
}

fn print_summary(report: &ExperimentReport) {
    for check in &report.checks {
        println!(
            "[{}] {} {}",
            if check.pass { "pass" } else { "FAIL" },
            check.check,
            check
                .measurements
                .iter()
                .map(|m| format!("{}={:.6e}", m.name, m.value))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }
    println!(
        "{}: {} ({} checks, config {})",
        report.kind,
        if report.pass { "PASS" } else { "FAIL" },
        report.checks.len(),
        report.config_hash
    );
}

fn write_outputs(dir: &Path, output: &RunOutput) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), output.report.to_json()?)?;
    for (name, content) in &output.files {
        std::fs::write(dir.join(name), content)?;
    }
    Ok(())
}

fn run_compare(a: &Path, b: &Path) -> ExitCode {
    let load = |p: &Path| -> Result<ExperimentReport, String> {
        let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
        ExperimentReport::from_json(&text).map_err(|e| e.to_string())
    };
    let (ra, rb) = match (load(a), load(b)) {
        (Ok(ra), Ok(rb)) => (ra, rb),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("compare error: {e}");
            return ExitCode::from(2);
        }
    };
    match compare(&ra, &rb) {
        Ok(diff) => {
            if diff.entries.is_empty() {
                println!("identical within tolerances ({} kind)", diff.kind);
                return ExitCode::SUCCESS;
            }
            for entry in &diff.entries {
                println!(
                    "{:?} {}::{} a={:?} b={:?} tol={:?}",
                    entry.kind, entry.check, entry.measurement, entry.a, entry.b, entry.tolerance
                );
            }
            if diff.unexpected() == 0 {
                println!("only expected drift (resolution-sensitive values)");
                ExitCode::SUCCESS
            } else {
                println!("{} unexpected drift(s)", diff.unexpected());
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("compare error: {err}");
            ExitCode::from(2)
        }
    }
}
