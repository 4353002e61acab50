//! Library side of the `rydberg-dress` command: configuration and the
//! subcommand implementations, each rendering its output as text.

pub mod commands;
pub mod config;

use std::fmt;

pub use config::{Format, PresetName, RunConfig};

/// Process exit status of a failed run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Failure {
    Validation = 1,
    Config = 2,
    Contract = 3,
    Solver = 4,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub failure: Failure,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { failure: Failure::Config, message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        self.failure as u8
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<rydberg_dress::Error> for CliError {
    fn from(e: rydberg_dress::Error) -> Self {
        use rydberg_dress::Error as E;
        let failure = match e {
            E::InvalidArgument(_) | E::InvalidScenario(_) => Failure::Config,
            E::ContractViolation(_) => Failure::Contract,
            E::SingularSystem(_) | E::SystemTooLarge { .. } | E::DegenerateSteadyState(_) => Failure::Solver,
        };
        CliError { failure, message: e.to_string() }
    }
}
