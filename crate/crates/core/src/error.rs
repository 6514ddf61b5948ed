use alloc::string::String;

/// Broad classification of a failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The caller supplied arguments that violate a precondition.
    Validation,
    /// A numerical routine failed on otherwise valid input.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("matrix is rank deficient: column {column} has residual norm {residual:e} (scale {scale:e})")]
    RankDeficient {
        column: usize,
        residual: f64,
        scale: f64,
    },

    #[error("eigensolver did not converge: dim {dim}, eigenvalue {index} after {iterations} sweeps, frobenius norm {norm:e}")]
    NoConvergence {
        dim: usize,
        index: usize,
        iterations: usize,
        norm: f64,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NoConvergence { .. } | Error::NonFinite(_) => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
