//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chart mismatch: expected `{expected}`, found `{found}`")]
    ChartMismatch { expected: String, found: String },

    #[error("chart dimension {dim} exceeds the supported maximum of 8")]
    DimensionLimit { dim: usize },

    #[error("degree {degree} out of range for a chart of dimension {dim}")]
    DegreeRange { degree: usize, dim: usize },

    #[error("tangent vectors must share one base point")]
    BasePointMismatch,

    #[error("expected {expected} tangent vectors, found {found}")]
    VectorCount { expected: usize, found: usize },

    #[error("point lies outside the domain of chart `{chart}`")]
    DomainViolation { chart: String },

    #[error("frame is not linearly independent (|det| = {det:e})")]
    DegenerateFrame { det: f64 },

    #[error("frame too ill-conditioned (condition estimate {cond:e})")]
    IllConditionedFrame { cond: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Newton projection did not converge: residual {residual:e} after {iterations} iterations")]
    NewtonDivergence { residual: f64, iterations: usize },

    #[error("sampling failed: {0}")]
    SamplingFailure(String),

    #[error("flow left its domain at r = {r}")]
    FlowLeftDomain { r: f64 },

    #[error("construction failed: {0}")]
    ConstructionFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
