//! File formats, commands and reports behind the `semistab` binary.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model error: {0}")]
    Model(#[from] semistab_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

pub fn exit_code(r: &Result<Outcome, CliError>) -> ExitCode {
    match r {
        Ok(Outcome::Pass) => ExitCode::from(0),
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(_) => ExitCode::from(2),
    }
}
