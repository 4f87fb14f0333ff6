//! Error types shared across the crate.

use thiserror::Error;

/// Numeric failure during jet or scalar arithmetic.
///
/// These are *data-dependent* failures (domain violations, overflow to
/// non-finite values, incompatible jet shapes), as opposed to programming
/// errors, which panic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    /// Evaluation left the mathematical domain of an operation
    /// (division by zero, `ln` of a non-positive value, `sqrt` of a
    /// negative value, `abs`/`sqrt` differentiated at a point where the
    /// derivative does not exist).
    #[error("domain error: {0}")]
    Domain(String),
    /// An operation produced a NaN or infinity.
    #[error("non-finite result: {0}")]
    NonFinite(String),
    /// Jets of different order/mode/dimension were mixed.
    #[error("jet shape mismatch: {0}")]
    Shape(String),
}

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Expression syntax error with 1-based source position.
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    /// An identifier was referenced at evaluation time without a binding.
    #[error("unbound name `{0}`")]
    Unbound(String),
    /// Numeric failure (domain error, non-finite value, jet shape mismatch).
    #[error(transparent)]
    Num(#[from] NumError),
    /// Model-file or model-definition problem.
    #[error("model error: {0}")]
    Model(String),
    /// An argument violated an operation's documented precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A numerical procedure failed to converge or aborted
    /// (Newton divergence, step-size underflow, non-equilibrium input).
    #[error("solver failure: {0}")]
    Solve(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error indicates bad input (usage/model problems)
    /// rather than a numerical failure encountered while computing.
    pub fn is_usage_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Unbound(_)
                | Error::Model(_)
                | Error::Precondition(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
