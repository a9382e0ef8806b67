use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use specshare_cli::config::RunConfig;
use specshare_cli::sweep::{render_csv, run_sweep, SweepSpec};
use specshare_cli::validate::{render_report, run_validation, ValidateOptions};
use specshare_cli::{commands, CliError, Result};

/// Spectrum-sharing capacity toolkit: dual solves, capacity and outage,
/// ratio distributions, figure sweeps and self-validation.
#[derive(Parser)]
#[command(name = "specshare", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value overrides applied after the file.
    #[arg(value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Lagrange multipliers of one scenario.
    Solve(RunArgs),
    /// Ergodic capacity and outage of the solved (or fixed) policy.
    Metrics {
        #[command(flatten)]
        run: RunArgs,
        /// Add a Monte Carlo estimate using the samples/seed/streams/sim_mode keys.
        #[arg(long)]
        simulate: bool,
    },
    /// Tabulate the served-ratio distribution.
    Dist(RunArgs),
    /// Run a sweep spec and write one CSV row per point and scenario.
    Sweep {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the self-checks and write a PASS/FAIL/INFO report.
    Validate {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Absolute tolerance of the quadratures behind the checks.
        #[arg(long)]
        abs_tol: Option<f64>,
        /// Monte Carlo samples per check.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(run: &RunArgs) -> Result<RunConfig> {
    RunConfig::load(run.config.as_deref(), &run.set)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(run) => emit(run.out.as_deref(), &commands::solve_csv(&load(&run)?)?),
        Command::Metrics { run, simulate } => emit(run.out.as_deref(), &commands::metrics_csv(&load(&run)?, simulate)?),
        Command::Dist(run) => emit(run.out.as_deref(), &commands::dist_csv(&load(&run)?)?),
        Command::Sweep { spec, out } => {
            let spec = SweepSpec::load(&spec)?;
            let rows = run_sweep(&spec);
            emit(out.as_deref(), &render_csv(&spec, &rows))?;
            match rows.iter().filter(|r| r.outcome.is_err()).count() {
                0 => Ok(()),
                failed => Err(CliError::RowsFailed {
                    failed,
                    total: rows.len(),
                }),
            }
        }
        Command::Validate {
            out,
            abs_tol,
            samples,
            seed,
        } => {
            let d = ValidateOptions::default();
            let opts = ValidateOptions {
                abs_tol: abs_tol.unwrap_or(d.abs_tol),
                samples: samples.unwrap_or(d.samples),
                seed: seed.unwrap_or(d.seed),
            };
            let (report, failed) = render_report(&run_validation(&opts)?);
            emit(out.as_deref(), &report)?;
            if failed > 0 {
                return Err(CliError::ValidationFailed(failed));
            }
            Ok(())
        }
    }
}

/// First non-empty line without a leading `error:`.
fn one_line(msg: &str) -> String {
    let line = msg
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .unwrap_or("unknown error");
    line.strip_prefix("error:").unwrap_or(line).trim().to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}
