use thiserror::Error;

/// Errors raised by the transforms, samplers and integrators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("period mismatch: {0} vs {1}")]
    PeriodMismatch(usize, usize),

    #[error("cyclic vector must have at least one entry")]
    EmptyVector,

    #[error("non-finite entry {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("inputs are not strictly ordered: difference {diff} at index {index}")]
    NotOrdered { index: usize, diff: f64 },

    #[error("domain violation at stage ({stage}, {column}): difference {diff} at index {index}")]
    Domain {
        stage: usize,
        column: usize,
        index: usize,
        diff: f64,
    },

    #[error("family must contain at least one vector")]
    EmptyFamily,

    #[error("divergent sum: slope {lower} must be strictly below {upper}")]
    Divergent { lower: f64, upper: f64 },

    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
