use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported polynomial degree {0} (supported: 1..=5)")]
    UnsupportedDegree(usize),

    #[error("unsupported quadrature degree {0} (supported: 0..=12)")]
    UnsupportedQuadrature(usize),

    #[error("point {point:?} lies outside the {domain}")]
    Domain { point: [f64; 2], domain: &'static str },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("singular system: pivot {pivot:e} for unknown {index}")]
    Singular { index: usize, pivot: f64 },

    #[error("solve residual {residual:e} exceeds bound {bound:e}")]
    Inaccurate { residual: f64, bound: f64 },

    #[error("series did not converge within {terms} terms (last term magnitude {last_term:e})")]
    Truncation { terms: usize, last_term: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
