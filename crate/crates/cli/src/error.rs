//! CLI error taxonomy; each variant maps to a documented exit code.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("checkpoint mismatch: {0}")]
    CheckpointMismatch(String),
    #[error("run log error: {0}")]
    Log(String),
    #[error("invalid morphology:\n{0}")]
    InvalidMorphology(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("engine error: {0}")]
    Engine(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Exit codes: 2 for unreadable/inconsistent inputs, 3 for checkpoint
    /// mismatches, 1 for everything else (including invalid morphologies).
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Log(_) | CliError::Parse(_) => 2,
            CliError::CheckpointMismatch(_) => 3,
            CliError::InvalidMorphology(_) | CliError::Engine(_) | CliError::Io(_) => 1,
        }
    }
}
