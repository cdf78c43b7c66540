use std::path::PathBuf;

use irb_core::Error;
use thiserror::Error;

/// Process exit codes.
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("dimension must lie in [1, 64], got {0}")]
    BadDim(usize),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "ReadError",
            CliError::Write { .. } => "WriteError",
            CliError::BadDim(_) => "BadDim",
            CliError::Usage(_) => "Usage",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        let CliError::Core(e) = self else {
            return EXIT_INPUT;
        };
        match e {
            Error::NotSelective { .. }
            | Error::UmaxDegenerate { .. }
            | Error::EmptySector { .. }
            | Error::ZeroRate
            | Error::AlreadyClassical
            | Error::DegenerateGap { .. } => EXIT_NEGATIVE,
            Error::StepTooCoarse(_) | Error::UndefinedPc { .. } => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
