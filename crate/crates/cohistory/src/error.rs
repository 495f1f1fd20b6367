use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("stage `{stage}` needs the outputs of `{prerequisite}`; run `pipeline {prerequisite}` first")]
    MissingDependency { stage: &'static str, prerequisite: &'static str },
    #[error("stage `{stage}` was produced with a different configuration; pass --force to overwrite")]
    ConfigMismatch { stage: &'static str },
    #[error(transparent)]
    Core(#[from] cohistory_core::Error),
    #[error("{0} invariant violation(s) found")]
    Violations(usize),
}

impl PipelineError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        PipelineError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        PipelineError::Parse { path: path.into(), line, message: message.into() }
    }

    /// Process exit code: 1 for failed checks and runtime failures, 2 when the
    /// invocation itself needs fixing.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_)
            | PipelineError::MissingDependency { .. }
            | PipelineError::ConfigMismatch { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
