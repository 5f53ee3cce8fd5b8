//! The `pharmap` command line: `pharmap <command> --config <path>
//! [--outdir <path>] [--strict] [--threads N]`.
//!
//! Exit status is 0 on success, 1 on I/O or runtime failure, 2 on invalid
//! configuration or input data, 3 when `--strict` is set and a solve did
//! not converge.

mod commands;
pub mod config;
mod report;
pub mod setup;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use crate::boundary::BoundaryError;
use crate::mesh::MeshError;
use crate::oracles::OracleError;
use crate::solver::SolverError;
pub use config::{Command, ConfigError, RunConfig};
pub use setup::boundary_generator;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("unknown boundary generator `{0}` (expected polar_cap, equator or custom)")]
    UnknownGenerator(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0}")]
    Threads(String),
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::UnknownGenerator(_) | CliError::Boundary(_) => EXIT_INVALID,
            CliError::Mesh(MeshError::Io(_)) => EXIT_FAILURE,
            CliError::Mesh(_) => EXIT_INVALID,
            CliError::Solver(
                SolverError::InvalidConfig(_)
                | SolverError::InfeasibleBoundary(_)
                | SolverError::InfeasibleInit(_)
                | SolverError::MissingBall,
            ) => EXIT_INVALID,
            CliError::Oracle(OracleError::InvalidParameter(_)) => EXIT_INVALID,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
            _ => EXIT_FAILURE,
        }
    }
}

pub(crate) fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Parser)]
#[command(
    name = "pharmap",
    version,
    about = "Discrete p-harmonic maps into surfaces: solves, uniqueness experiments and inequality checks"
)]
pub struct Args {
    /// What to run.
    #[arg(value_enum)]
    pub command: Command,
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long)]
    pub outdir: Option<PathBuf>,
    /// Exit with status 3 when any solve fails to converge.
    #[arg(long)]
    pub strict: bool,
    /// Worker threads for independent trials (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// What a command produced, for the summary line on stdout.
pub struct Outcome {
    pub summary: String,
    pub all_converged: bool,
}

/// Execute a parsed invocation.
pub fn run(args: &Args) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(&args.config).map_err(io_error(&args.config))?;
    let parsed = RunConfig::parse(&text)?;
    let config = parsed.with_defaults(args.command);
    let outdir =
        args.outdir.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("pharmap-out"));
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();

    let work = || -> Result<Outcome, CliError> {
        fs::create_dir_all(&outdir).map_err(io_error(&outdir))?;
        let canonical = outdir.join("config.canonical");
        fs::write(&canonical, config.to_canonical_string()).map_err(io_error(&canonical))?;
        commands::execute(args.command, &config, &base, &outdir)
    };
    let outcome = match args.threads {
        Some(0) => return Err(field_error_threads()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Threads(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    if args.strict && !outcome.all_converged {
        return Err(CliError::NotConverged(format!("{} (strict mode: not all solves converged)", outcome.summary)));
    }
    Ok(outcome)
}

fn field_error_threads() -> CliError {
    CliError::Config(config::field_error("--threads", "must be at least 1"))
}

/// Parse `argv`, run, print diagnostics, and return the exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&args) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("pharmap: {e}");
            e.exit_code()
        }
    }
}
