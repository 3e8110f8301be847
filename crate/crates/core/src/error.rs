use std::path::PathBuf;

use thiserror::Error;

use crate::align::AlignError;
use crate::corpus::CorpusError;
use crate::lm::LmError;
use crate::metrics::MetricError;
use crate::morph::MorphError;
use crate::reorder::ParseError;
use crate::translit::TranslitError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error. Every variant maps onto one of the process exit codes
/// through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Data {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Corpus(#[from] CorpusError),

    #[error(transparent)]
    Morph(#[from] MorphError),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Lm(#[from] LmError),

    #[error(transparent)]
    Align(#[from] AlignError),

    #[error(transparent)]
    Translit(#[from] TranslitError),

    #[error(transparent)]
    Metric(#[from] MetricError),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn data(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Data {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// 1 for usage/config problems, 2 for bad input data, 3 for broken
    /// internal invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Invariant(_) => 3,
            Error::Corpus(CorpusError::InvalidPolicy(_)) => 1,
            Error::Corpus(CorpusError::InsufficientData { .. }) => 2,
            Error::Morph(MorphError::InvalidTable(_)) => 1,
            Error::Lm(LmError::InvalidOrder(_)) => 1,
            Error::Align(AlignError::InvalidIterations) => 1,
            Error::Translit(TranslitError::InvalidArgument(_)) => 1,
            Error::Metric(MetricError::LengthMismatch { .. }) => 2,
            _ => 2,
        }
    }
}
