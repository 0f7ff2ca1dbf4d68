mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use config::{Common, Overrides};
use error::CliError;
use report::{Outcome, Report};

/// Finsler-type gravity on tangent bundles: geometry checks, shell solutions,
/// brane profiles and Horava-Lifshitz dispersion sweeps.
#[derive(Debug, Parser)]
#[command(name = "finslerforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the JSON report and CSV tables; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance applied to every check, overriding the config.
    #[arg(long)]
    tol: Option<f64>,
    /// Multiplies every grid and sample count.
    #[arg(long, default_value_t = 1.0)]
    grid_scale: f64,
    /// Seed for randomized probe points, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Record the wall time in the report, which makes it non-reproducible.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fiber Hessian of a generating function, Euler identity and 0-homogeneity.
    Hessian(RunArgs),
    /// Canonical d-connection: metric compatibility, torsion and distortion.
    Connection(RunArgs),
    /// Curvature and Ricci tensor of the canonical d-connection.
    Curvature(RunArgs),
    /// Residuals of the separated shell equations for a given ansatz.
    VerifySolution(RunArgs),
    /// Exact shell solution from generating data, with its residuals.
    GenerateSolution(RunArgs),
    /// Trapping profile, sources and conservation residual.
    Brane(RunArgs),
    /// Dispersion-branch parameter sweep.
    Mdr(RunArgs),
    /// ADM data, curvature invariants and action densities.
    HlAction(RunArgs),
}

type Runner = fn(&Value, &Overrides) -> Result<(Common, Outcome), CliError>;

impl Command {
    fn parts(&self) -> (&'static str, Runner, &RunArgs) {
        use commands::*;
        match self {
            Command::Hessian(a) => ("hessian", geometry::hessian, a),
            Command::Connection(a) => ("connection", geometry::connection, a),
            Command::Curvature(a) => ("curvature", geometry::curvature, a),
            Command::VerifySolution(a) => ("verify-solution", shell::verify, a),
            Command::GenerateSolution(a) => ("generate-solution", shell::generate, a),
            Command::Brane(a) => ("brane", brane::run, a),
            Command::Mdr(a) => ("mdr", mdr::run, a),
            Command::HlAction(a) => ("hl-action", hl::run, a),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FINSLERFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::config("FINSLERFORGE_THREADS", format!("expected a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config("FINSLERFORGE_THREADS", e))
}

/// Returns whether every check passed.
fn run(name: &str, runner: Runner, args: &RunArgs) -> Result<bool, CliError> {
    let start = Instant::now();
    configure_threads()?;
    if !(args.grid_scale.is_finite() && args.grid_scale > 0.0) {
        return Err(CliError::config("--grid-scale", "must be a positive number"));
    }
    if let Some(t) = args.tol {
        config::positive("--tol", t)?;
    }
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.display().to_string(),
        source,
    })?;
    let config: Value = serde_json::from_str(&text).map_err(|e| CliError::config("<file>", e))?;
    let ov = Overrides {
        tol: args.tol,
        grid_scale: args.grid_scale,
        seed: args.seed,
    };
    let (common, outcome) = runner(&config, &ov)?;
    let checks = outcome.checks.finish(&common)?;
    let mut report = Report::new(name, config, checks, outcome.warnings, outcome.results);
    if args.timing {
        report.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    }
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            if let Some(csv) = &outcome.csv {
                let file = format!("{name}.csv");
                csv.write(&dir.join(&file))?;
                report.artifacts.push(file);
            }
            report.emit(&dir.join(format!("{name}.json")))?;
        }
        None => {
            if outcome.csv.is_some() {
                report.warnings.push("no --out directory given; CSV table not written".into());
            }
            print!("{}", report.to_json());
        }
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} (max residual {}, tolerance {:e})", c.name, c.max_residual, c.tolerance);
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, runner, args) = cli.command.parts();
    match run(name, runner, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
