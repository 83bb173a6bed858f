//! Command-line front end: config files, datasets, checkpoints and the five
//! subcommands. The `bsbm` binary only parses flags and calls into here.
//!
//! Exit status: 0 success, 1 runtime error, 2 config error, 3 data error.

mod checkpoint;
mod commands;
mod config;
mod dataset;
mod oracle;

use std::fmt;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use commands::{
    cmd_evaluate, cmd_oracle, cmd_sample, cmd_tower, cmd_train, configure_workers, EvaluateArgs,
    OracleArgs, SampleArgs, TowerArgs, TrainArgs, TrainSummary, METRIC_ROWS, SKIPPED,
};
pub use config::{LevelChoice, MeshInit, ModelConfig, RawConfig, ReadoutChoice, RunConfig};
pub use dataset::{read_dataset, write_dataset};
pub use oracle::{run_oracle_suite, OracleCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Runtime,
    Config,
    Data,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Runtime => 1,
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Data,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Runtime,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.kind {
            ErrorKind::Runtime => "error",
            ErrorKind::Config => "config error",
            ErrorKind::Data => "data error",
        };
        write!(f, "{label}: {}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
