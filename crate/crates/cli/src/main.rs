//! `vervaat`: sample ensembles, run checks and tabulate analytic functions.

mod check;
mod sample;
mod table;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vervaat_core::Error;

/// Statistical failure.
const EXIT_FAIL: u8 = 1;
/// Bad flags or configuration.
const EXIT_USAGE: u8 = 2;
/// Reading or writing files failed.
const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "vervaat", version, about = "Vervaat transforms of Brownian paths: sampling, checks and tables")]
struct Cli {
    /// Worker threads; changes wall time only, never results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write runtime_ms = 0 in reports so reruns are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw an ensemble of paths and write it to a file.
    Sample(sample::SampleArgs),
    /// Run one named check and write its JSON report.
    Check(check::CheckArgs),
    /// Tabulate an analytic function over a grid as CSV.
    Table(table::TableArgs),
    /// Run every check and write suite.json.
    Suite(check::SuiteArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error from a subcommand together with its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Io(_) => EXIT_IO,
            Error::Config(_) | Error::InvalidArgument(_) | Error::SpacingMismatch { .. } => EXIT_USAGE,
            _ => EXIT_FAIL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

/// Seed from `VERVAAT_SEED`, if set.
pub fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("VERVAAT_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::usage(format!("VERVAAT_SEED is not an integer: {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    match cli.command {
        Command::Sample(a) => sample::run_sample(a),
        Command::Check(a) => check::run_check(a, cli.no_timing),
        Command::Table(a) => table::run_table(a),
        Command::Suite(a) => check::run_suite(a, cli.no_timing),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
