use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not normal (commutator residual {residual:.3e})")]
    NotNormal { residual: f64 },

    #[error("not a group element: {0}")]
    NotInGroup(String),

    #[error("not a Lie algebra element: {0}")]
    NotInAlgebra(String),

    #[error("numerical failure in {stage} after {iterations} iterations (residual {residual:.3e})")]
    Numeric {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("logarithm branch is ambiguous: {0}")]
    BranchAmbiguity(String),

    #[error("invalid subgroup: {0}")]
    InvalidSubgroup(String),

    #[error("unsupported invariant: {0}")]
    UnsupportedInvariant(String),

    #[error("unsupported check: {0}")]
    UnsupportedCheck(String),

    #[error("problem too large: {what} is {size}, limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("malformed input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
