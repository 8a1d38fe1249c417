//! Batch experiment runner behind the `finsec` binary.
//!
//! Exit codes: 0 when every declared expectation holds, 1 on a
//! classification mismatch, 2 for an invalid configuration and 3 for a
//! numerical or I/O failure.

mod config;
mod experiments;
mod report;

use std::io;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use crate::error::Error;

pub use config::{
    parse_compact, parse_symbol, parse_triples, Experiment, ExperimentConfig, Generator,
    Restriction,
};
pub use experiments::{build, run, RunOutput};
pub use report::{num, Reports};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Numeric(#[from] Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Numeric(e) => match e {
                Error::InvalidHorizon(_)
                | Error::InvalidCuntz(_)
                | Error::NotInterlacing(_)
                | Error::InvalidInterval { .. }
                | Error::OutOfRange { .. }
                | Error::NotSelfAdjoint { .. }
                | Error::ZeroOnCircle { .. } => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            },
            CliError::Io { .. } => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "finsec", version, about = "Finite-section spectral experiments")]
pub struct Args {
    /// Experiment configuration (flat `key = value` file).
    pub config: PathBuf,
    /// Output directory; overrides the `out` key.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Upper cap on `n_max`.
    #[arg(long = "max-n")]
    pub max_n: Option<usize>,
    /// Worker threads for per-size matrix work.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// What a completed run wrote and which expectations failed.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub mismatches: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.mismatches.is_empty() {
            EXIT_OK
        } else {
            EXIT_MISMATCH
        }
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::parse(&text)
}

/// Loads the config, runs it and writes the reports.
pub fn execute(args: &Args) -> Result<Outcome, CliError> {
    let mut cfg = load(&args.config)?;
    if let Some(cap) = args.max_n {
        cfg.cap_horizon(cap)?;
    }
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("finsec-out"));
    let output = run(&cfg)?;
    let files = output.reports.write(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    Ok(Outcome {
        files,
        mismatches: output.mismatches,
    })
}

/// Runs the binary logic and returns the process exit code.
pub fn main_with(args: Args) -> i32 {
    if let Some(t) = args.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return EXIT_CONFIG;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }
    match execute(&args) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            for m in &outcome.mismatches {
                eprintln!("mismatch: {m}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
