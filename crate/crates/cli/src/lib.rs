//! Library side of the `obring` command: scenario parsing, the three
//! commands, and the record formats they write.

pub mod commands;
pub mod record;
pub mod scenario;

use thiserror::Error;

pub use commands::{
    cmd_explore, cmd_mc, cmd_run, execute_explore, execute_mc, execute_run, Options, Output,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    CapsExceeded(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Process exit status of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    ConfigError,
    JudgementFailure,
    CapsExceeded,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::ConfigError => 1,
            Status::JudgementFailure => 2,
            Status::CapsExceeded => 3,
        }
    }
}

impl From<&CliError> for Status {
    fn from(e: &CliError) -> Self {
        match e {
            CliError::Config(_) | CliError::Io(_) => Status::ConfigError,
            CliError::CapsExceeded(_) => Status::CapsExceeded,
        }
    }
}
