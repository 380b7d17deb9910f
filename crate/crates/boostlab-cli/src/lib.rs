//! Command-line driver for the boosting library: generates the simulated
//! dataset, runs the experiments, and writes CSV (authoritative) and SVG
//! (visual check) files.
//!
//! Every command is a pure function of the resolved configuration, so a
//! rerun with the same flags, config file, and seed reproduces each CSV
//! byte for byte, whatever the thread count.

use std::fmt;
use std::path::Path;

use clap::Parser;

mod args;
pub mod commands;
pub mod config;
pub mod csv;
pub mod svg;

pub use args::{Cli, GlobalOpts, Verb};

/// Failures surfaced to the shell, partitioned by exit code: bad flags or
/// parameters exit 2, numeric breakdowns exit 3, filesystem trouble exit 4.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<boostlab::Error> for CliError {
    fn from(err: boostlab::Error) -> Self {
        match err {
            boostlab::Error::InvalidInput(m) => CliError::Usage(m),
            boostlab::Error::Numeric(m) => CliError::Numeric(m),
        }
    }
}

/// Parses the process arguments and environment, runs the requested
/// command, and returns the exit code.
pub fn run_from_env() -> i32 {
    let env_seed = std::env::var("BOOSTLAB_SEED").ok();
    match Cli::try_parse() {
        Err(err) => {
            let _ = err.print();
            if err.use_stderr() {
                2
            } else {
                0 // --help / --version
            }
        }
        Ok(cli) => match dispatch(&cli, env_seed.as_deref()) {
            Ok(()) => 0,
            Err(err) => {
                eprintln!("error: {err}");
                err.exit_code()
            }
        },
    }
}

/// Resolves the configuration (flags over config file over environment
/// seed over defaults) and runs the chosen verb.
pub fn dispatch(cli: &Cli, env_seed: Option<&str>) -> Result<(), CliError> {
    let cfg = config::ExperimentConfig::assemble(&cli.opts, env_seed)?;
    match cli.verb {
        Verb::Fit => commands::cmd_fit(&cfg),
        Verb::Errors => commands::cmd_errors(&cfg),
        Verb::Eigen => commands::cmd_eigen(&cfg),
        Verb::Project => commands::cmd_project(&cfg),
        Verb::Stochastic => commands::cmd_stochastic(&cfg),
    }
}
