use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signature ({r}, {s})")]
    InvalidSignature { r: usize, s: usize },
    #[error("dimension {n} exceeds the supported maximum of {max}")]
    Capacity { n: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficient array is not antisymmetric (defect {defect:e})")]
    NotAntisymmetric { defect: f64 },
    #[error("metric is singular or has the wrong signature at {point:?}")]
    SingularMetric { point: Vec<f64> },
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("spinor field gauge does not match the patch: {0}")]
    GaugeMismatch(String),
    #[error("invalid metric family: {0}")]
    InvalidFamily(String),
    #[error("profile derivatives disagree with finite differences (defect {defect:e})")]
    ProfileDerivative { defect: f64 },
    #[error("spinor square degree {degree} out of range 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("hermitian phase calibration failed: {0}")]
    Calibration(String),
    #[error("convention violation: {0}")]
    ConventionViolation(String),
    #[error("field does not solve the twistor equation (residual {residual:e})")]
    NotASolution { residual: f64 },
    #[error("two-form is zero; orbit type undefined")]
    ZeroTwoForm,
    #[error("two-form is not simple (defect {defect:e})")]
    NotSimple { defect: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
