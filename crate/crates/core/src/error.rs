use thiserror::Error;

use crate::ergodic::ErgodicReport;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("duality map needs a strictly convex space, got p = {0}")]
    NotStrictlyConvex(f64),

    #[error("all generators are below tolerance {0}")]
    ZeroSubspace(f64),

    #[error("divisor vanishes at atom {0}")]
    FullSupport(usize),

    #[error("not an isometry: {0}")]
    NotIsometry(String),

    #[error("too large: {what} = {size} exceeds the cap {cap}")]
    TooLarge { what: &'static str, size: usize, cap: usize },

    #[error("the isometry group of a Hilbert space is not enumerable (p = 2)")]
    HilbertCase,

    #[error("no isometry of the ambient space extends the prescribed map")]
    NotExtendable,

    #[error("element set is not a group: {0}")]
    NotAGroup(String),

    #[error("operator is not a certified contraction: {0}")]
    NotContraction(String),

    #[error("Cesàro averages did not converge (residual {})", .0.residual)]
    Convergence(Box<ErgodicReport>),

    #[error("operator is not a projection: residual {0:e}")]
    NotProjection(f64),

    #[error("degenerate range: dim {dim} in ambient dimension {n}")]
    DegenerateRange { dim: usize, n: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension { expected, got })
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(format!("line {} column {}: {}", e.line(), e.column(), e))
    }
}
