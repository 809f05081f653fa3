use thiserror::Error;

/// Errors raised by the geometric toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GfbError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("structure constants are not antisymmetric at ({a}, {b}, {c})")]
    NotAntisymmetric { a: usize, b: usize, c: usize },

    #[error("representation property violated: residual {0:e}")]
    NotARepresentation(f64),

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("point {point:?} lies outside the chart")]
    OutsideDomain { point: Vec<f64> },

    #[error("point {point:?} is closer than {h} to the chart boundary")]
    TooCloseToBoundary { point: Vec<f64>, h: f64 },

    #[error("coframe is degenerate at {point:?} (condition number {condition:e})")]
    DegenerateCoframe { point: Vec<f64>, condition: f64 },

    #[error("flow left the chart at t = {time} (point {point:?})")]
    LeftDomain { time: f64, point: Vec<f64> },

    #[error("unknown catalog id `{0}`")]
    UnknownId(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("quaternion is not unit (norm {0})")]
    NonUnitQuaternion(f64),

    #[error("metric is not invariant under the representation (residual {0:e})")]
    NonInvariantMetric(f64),

    #[error("no global group action is available for `{0}`")]
    NoGroupAction(String),

    #[error("isotropy search exceeded its budget before the hits closed into a group")]
    ClosureBudgetExceeded,

    #[error("invalid path: {0}")]
    InvalidPath(String),
}

pub type Result<T> = std::result::Result<T, GfbError>;
