use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("value does not fit in a double: {0}")]
    Overflow(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    /// An operation needs exact weights but the space only has floating-point ones.
    #[error("mode error: {0}")]
    Mode(String),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected} variables, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular system: pivot {pivot} vanishes")]
    Singular { pivot: usize },

    /// A mathematical identity that must hold did not; indicates a bug or corrupted input.
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("no closed-form kernel for {0}; use a truncated Taylor sum")]
    NoClosedForm(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fixture integrity error: {0}")]
    Integrity(String),

    #[error("root finder did not converge for indices {0:?}")]
    NoConvergence(Vec<usize>),
}

pub type Result<T> = std::result::Result<T, Error>;
