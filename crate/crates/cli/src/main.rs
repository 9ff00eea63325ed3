//! `hilbert`: batch front end for Hilbert-geometry experiments.
//!
//! Exit codes: 0 pass, 1 configuration error, 2 geometry error, 3 violation.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hilbert_geometry::spec_file::SpecError;
use hilbert_geometry::GeometryError;

#[derive(Debug, Parser)]
#[command(name = "hilbert", version, about = "Hilbert-metric experiments on convex domains")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Domain-spec file (TOML).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    /// Violation tolerance; the default depends on the checker and the body.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the full output here and print only the summary.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Structured,
    Tabular,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hilbert distance, chord endpoints and cross-ratio of two points.
    Distance {
        /// First point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        /// Second point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<f64>,
    },
    /// Sample a non-positive curvature condition and report violations.
    Check {
        #[arg(value_enum)]
        which: Which,
    },
    /// Flag curvature on a deterministic grid of basepoints.
    Curvature {
        /// Grid nodes per axis.
        #[arg(long, default_value_t = 5)]
        grid: usize,
        /// Random pole/edge pairs per basepoint.
        #[arg(long, default_value_t = 8)]
        flags: usize,
        /// Outer grid ring as a fraction of the way to the boundary.
        #[arg(long, default_value_t = 0.5)]
        fraction: f64,
    },
    /// Berwald defect at the given points against a unit-ball noise floor.
    Berwald {
        /// Points as `x,y;x,y;...`.
        #[arg(long, allow_hyphen_values = true)]
        points: String,
        /// Random unit fibers per point.
        #[arg(long, default_value_t = 8)]
        fibers: usize,
    },
    /// Sampled convexity and boundedness checks on the spec.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Alexandrov,
    Busemann,
    Pedersen,
    Capsule,
    AngleSum,
    All,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Spec(_) => 1,
            CliError::Geometry(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Violation,
}

fn run(cli: Cli) -> Result<Status, CliError> {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    }
    let spec = report::LoadedSpec::load(cli.common.spec.as_deref())?;
    let output = commands::execute(&cli.command, &cli.common, &spec)?;
    match &cli.common.out {
        Some(path) => {
            std::fs::write(path, &output.text)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            print!("{}", output.summary);
        }
        None => print!("{}", output.text),
    }
    Ok(output.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
