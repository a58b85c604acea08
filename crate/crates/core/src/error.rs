use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rank {rank} for side length {n} (need 1 <= r <= n)")]
    InvalidRank { n: usize, rank: usize },

    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last_estimate})")]
    Convergence {
        iterations: usize,
        last_estimate: f64,
    },

    #[error("Neumann series diverges: contraction norm {norm} >= 1")]
    Divergence { norm: f64 },

    #[error("sampling exhausted: {0}")]
    Sampling(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
