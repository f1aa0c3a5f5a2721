use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::builder::BuildError;
use crate::coder::CoderError;
use crate::gain::GainError;
use crate::header::HeaderError;
use crate::symbol_model::SymbolError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Gain(#[from] GainError),
    #[error(transparent)]
    Header(#[from] HeaderError),
    #[error(transparent)]
    Coder(#[from] CoderError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("not an AGSY container")]
    BadMagic,
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u8),
    #[error("container truncated in the {0}")]
    Truncated(&'static str),
    #[error("container declares {declared} tokens but its header frequencies sum to {from_header}")]
    TokenCountMismatch { declared: u64, from_header: u64 },
    #[error("input of {0} bytes is too large for the container format")]
    TooLarge(usize),
    #[error("gain verification failed: relative deviation {deviation:e} exceeds {tolerance:e}")]
    VerificationFailed { deviation: f64, tolerance: f64 },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for I/O, 3 for format, capacity and verification failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
