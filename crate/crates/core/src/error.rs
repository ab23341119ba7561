use thiserror::Error;

use crate::spectral::Basis;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("basis mismatch: expected a matrix in the {expected} basis, got {found}")]
    BasisMismatch { expected: Basis, found: Basis },

    #[error("unknown state preset `{0}`")]
    UnknownPreset(String),

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("time grid must be strictly increasing (violated at index {0})")]
    NonIncreasingGrid(usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix has trace {0} instead of 1")]
    BadTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("unsupported matrix dimension {0}")]
    Dimension(usize),

    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("step size {dt:e} exceeds stability bound {bound:e}")]
    UnstableStep { dt: f64, bound: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
