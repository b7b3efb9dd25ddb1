//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped by
//! failure mode rather than by module, so callers (in particular the CLI)
//! can map them onto stable machine-readable kinds.

/// Unified error for all analysis routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation
    /// (e.g. an evaluation point off `[-1, 1]`, a dimension below 3).
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally invalid argument (wrong length, non-symmetric
    /// generating set, weights that do not sum to one, ...).
    #[error("argument error: {0}")]
    Argument(String),

    /// The requested series diverges; no finite value exists.
    #[error("divergence: {0}")]
    Divergence(String),

    /// The averaging operator is not compact for this parameter
    /// (`|delta| = 1`), so Schatten quantities are undefined.
    #[error("operator not compact: {0}")]
    NotCompact(String),

    /// A truncated series failed to reach the requested tolerance
    /// below the hard term cap.
    #[error("truncation cap exceeded: {0}")]
    Truncation(String),

    /// Exact integer arithmetic would overflow the return type.
    #[error("integer overflow: {0}")]
    Overflow(String),

    /// A size or enumeration cap was exceeded.
    #[error("resource cap exceeded: {0}")]
    Resource(String),

    /// The parameter combination is outside the supported range
    /// (e.g. composite modulus in the order formula).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An iterative solver did not reach its residual target.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A quadrature or sampling count is too small for the requested
    /// bandwidth, detected through residual energy that exact sampling
    /// would eliminate.
    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    /// A decomposition target is infeasible (no rotation angle exists).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Two independent computations of the same quantity disagree
    /// beyond their combined error bounds.
    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable lowercase kind string, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Argument(_) => "argument",
            Error::Divergence(_) => "divergence",
            Error::NotCompact(_) => "not_compact",
            Error::Truncation(_) => "truncation",
            Error::Overflow(_) => "overflow",
            Error::Resource(_) => "resource",
            Error::Unsupported(_) => "unsupported",
            Error::Convergence(_) => "convergence",
            Error::InsufficientSampling(_) => "insufficient_sampling",
            Error::Infeasible(_) => "infeasible",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
