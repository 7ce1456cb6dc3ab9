//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the computation modules.
#[derive(Debug, Error)]
pub enum Error {
    /// A signal or group name was referenced but never declared.
    #[error("unknown signal or group `{0}`")]
    UnknownSignal(String),

    /// A source, signal, or group name was declared twice.
    #[error("duplicate name `{0}`")]
    DuplicateName(String),

    /// A structural invariant of a system or plan is violated.
    #[error("invalid input: {field}: {reason}")]
    InvalidInput { field: String, reason: String },

    /// A covariance matrix that must be inverted is numerically singular.
    /// Signals a deterministic linear dependence; the caller must use a
    /// reduced representation (or sweep the noise downward instead of
    /// setting it to zero).
    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    /// The two independent evaluation routes of a conditional mutual
    /// information disagreed beyond tolerance.
    #[error("cross-check mismatch: {route_schur} vs {route_chain} bits (tolerance {tol})")]
    OracleMismatch {
        route_schur: f64,
        route_chain: f64,
        tol: f64,
    },

    /// A distortion target cannot be met even at the lower bracket
    /// (the relay observation is too noisy to fill the link).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The relay beamformer geometry is degenerate: no nonzero relay
    /// combiner reproduces the destination-side observation.
    #[error("rank deficient: {0}")]
    RankDeficient(String),

    /// A stated precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    /// Exhaustive search is capped and no candidate was supplied.
    #[error("search bound exceeded: alphabet size {size} over cap {cap}")]
    SearchBoundExceeded { size: usize, cap: usize },

    /// An operation needed an auxiliary map that was not supplied.
    #[error("missing auxiliary map `{0}`")]
    MissingAuxMap(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
