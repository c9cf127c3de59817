//! Library side of the `pinnbc` command: config merging, validation, and the
//! run driver. `main.rs` only parses flags and maps errors to exit codes.

use std::path::{Path, PathBuf};

use pinnbc::output::{emit_plotdata, emit_suite, OutputError};
use pinnbc::{train, Error, ExperimentReport, SuiteReport};
use thiserror::Error;

pub mod config;

pub use config::{FileConfig, Mode, Overrides, RunConfig, DEFAULT_OUTPUT_DIR};

/// Exit status for a config file that cannot be read, parsed or validated.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when training produced a non-finite loss or gradient.
pub const EXIT_DIVERGED: i32 = 3;
/// Exit status when result files cannot be written.
pub const EXIT_IO: i32 = 4;
/// Exit status for any other failure.
pub const EXIT_OTHER: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("config error: cannot read {}: {source}", path.display())]
    ConfigRead {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: training diverged at epoch {epoch}: non-finite {term}", label)]
    Diverged { label: String, epoch: usize, term: String },
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{label}: {source}")]
    Run {
        label: String,
        #[source]
        source: Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::ConfigRead { .. } => EXIT_CONFIG,
            CliError::Diverged { .. } => EXIT_DIVERGED,
            CliError::Output(_) => EXIT_IO,
            CliError::Run { .. } => EXIT_OTHER,
        }
    }

    fn from_run(label: &str, err: &Error) -> Self {
        match err {
            Error::Diverged { epoch, term } => CliError::Diverged {
                label: label.to_string(),
                epoch: *epoch,
                term: term.clone(),
            },
            other => CliError::Run {
                label: label.to_string(),
                source: other.clone(),
            },
        }
    }
}

/// What a successful or partially successful run produced.
#[derive(Debug)]
pub enum Outcome {
    Single(Box<ExperimentReport>),
    Suite(SuiteReport),
}

/// Loads the optional config file and merges the overrides into it.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let file = match path {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    RunConfig::resolve(file, overrides)
}

/// Trains and writes result files. Nothing is written before `config` has
/// been validated, which [`RunConfig::resolve`] guarantees.
///
/// In suite mode every case that finished is written even when another case
/// diverged; the first divergence is then returned as the error.
pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    match &config.mode {
        Mode::Single { problem, strategy } => {
            let strategy = problem
                .strategy(*strategy, config.train.penalties)
                .map_err(|e| CliError::from_run(problem.name(), &e))?;
            let report = train(problem, &strategy, &config.train)
                .map_err(|e| CliError::from_run(&format!("{problem} with {}", strategy.kind()), &e))?;
            emit_plotdata(&report, &config.output_dir)?;
            Ok(Outcome::Single(Box::new(report)))
        }
        Mode::Suite => {
            let suite = pinnbc::run_suite(&config.physics, &config.train);
            emit_suite(&suite, &config.output_dir)?;
            if let Some((case, Err(e))) = suite.runs.iter().find(|(_, r)| r.is_err()) {
                return Err(CliError::from_run(case.label(), e));
            }
            Ok(Outcome::Suite(suite))
        }
    }
}
