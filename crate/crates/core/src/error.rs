use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),

    #[error("empty point (dimension must be at least 1)")]
    EmptyPoint,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("unbounded domain must be resolved to a ball first")]
    UnresolvedDomain,

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("rng stream exhausted after {0} draws")]
    RngExhausted(u64),

    #[error(
        "inner solver failed to certify suboptimality: gap {gap:e} after {iterations} iterations"
    )]
    Certificate { gap: f64, iterations: usize },

    #[error("bisection did not converge within {0} steps")]
    NoConvergence(usize),

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("trial failed (solver {solver}, n {n}, trial {trial}): {source}")]
    Trial {
        solver: String,
        n: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
