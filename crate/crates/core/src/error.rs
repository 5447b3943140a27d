use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 2")]
    InvalidDimension(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("channel is not invertible (smallest/largest singular value = {ratio:.3e})")]
    NonInvertibleChannel { ratio: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("target lies outside the span of the operations (residual {residual:.3e})")]
    TargetOutsideSpan { residual: f64 },

    #[error("basis is rank deficient: rank {rank} of {expected}")]
    RankDeficientBasis { rank: usize, expected: usize },

    #[error("LP solver failure: {0}")]
    SolverFailure(String),

    #[error("bound not applicable: {0}")]
    TheoremInapplicable(String),

    #[error("invalid noise specification: {0}")]
    InvalidSpec(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("operation is not trace preserving: {0}")]
    NonTracePreserving(String),
}

/// Coarse grouping used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed input (shapes, files).
    Usage,
    /// Parameters outside the mathematical domain of an operation.
    Domain,
    /// The numerics failed on otherwise valid input.
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidInput(_) | Error::DimensionMismatch { .. } => ErrorClass::Usage,
            Error::InvalidDimension(_)
            | Error::NonInvertibleChannel { .. }
            | Error::InvalidParameter(_)
            | Error::TargetOutsideSpan { .. }
            | Error::TheoremInapplicable(_)
            | Error::InvalidSpec(_)
            | Error::InvalidDecomposition(_)
            | Error::NonTracePreserving(_) => ErrorClass::Domain,
            Error::RankDeficientBasis { .. } | Error::SolverFailure(_) | Error::ResourceLimit(_) => {
                ErrorClass::Numerical
            }
        }
    }
}
