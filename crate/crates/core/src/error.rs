use thiserror::Error;

/// Errors produced by the localization pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("power must be positive, got {0} mW")]
    NonPositivePower(f64),

    #[error("{kind} channel index {index} out of range")]
    InvalidChannel { kind: &'static str, index: u8 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("aggregation window is empty")]
    EmptySamples,

    #[error("need at least {needed} anchors, got {got}")]
    InsufficientAnchors { needed: usize, got: usize },

    #[error("anchor and range lists differ in length ({anchors} vs {ranges})")]
    MismatchedLengths { anchors: usize, ranges: usize },

    #[error("anchor geometry is degenerate (collinear or coincident anchors)")]
    DegenerateGeometry,

    #[error("position coincides with anchor {0}")]
    SingularGeometry(u32),

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("deployment needs {required} beacons, limit is {limit}")]
    Capacity { required: u64, limit: u64 },

    #[error("no resolved steps to evaluate")]
    EmptyResult,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
