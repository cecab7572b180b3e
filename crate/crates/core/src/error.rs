use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("match {index} is a tie but the tournament does not allow ties")]
    TieInBinaryTournament { index: usize },

    #[error("invalid tournament: {0}")]
    InvalidTournament(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} did not converge after {iterations} iterations ({detail})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        detail: String,
    },

    /// Maximum likelihood estimates run off to infinity, typically because a
    /// team won or lost every match it played.
    #[error("maximum likelihood estimate diverges (|ability| of {team} exceeded {bound})")]
    Divergent { team: String, bound: f64 },

    #[error("{failed} of {total} replicates failed")]
    TooManyFailures { failed: usize, total: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by the numerical fit rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. } | Error::Divergent { .. } | Error::TooManyFailures { .. }
        )
    }
}
