//! Error types shared by every module.

use thiserror::Error;

/// Errors produced by geometric and analytic operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// The halfspace system has no feasible point.
    #[error("infeasible body: {0}")]
    InfeasibleBody(String),

    /// Support value is infinite in some direction.
    #[error("unbounded body: {0}")]
    UnboundedBody(String),

    /// The body (or an inner parallel body) has empty interior.
    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    /// A point expected on the boundary is not on it.
    #[error("point not on boundary: {0}")]
    NotOnBoundary(String),

    /// The Minkowski functional requires the origin strictly inside the body.
    #[error("origin not interior: {0}")]
    OriginNotInterior(String),

    /// An iterative solver exhausted its budget without meeting tolerance.
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    /// The inner ball-constrained solve of the regularizer failed.
    #[error("inner solve failure: {0}")]
    InnerSolveFailure(String),

    /// Evaluation outside the configured domain.
    #[error("domain exceeded: {0}")]
    DomainExceeded(String),

    /// The queried point is not a touch point of (f, g).
    #[error("not a touch point: {0}")]
    NotTouchPoint(String),

    /// The finite-difference step is unreliable at the requested scale.
    #[error("step underflow: {0}")]
    StepUnderflow(String),

    /// The subdifferential at the expansion center is not a singleton.
    #[error("kink at center: {0}")]
    KinkAtCenter(String),

    /// The extension's quadratic margin probes failed.
    #[error("margin failure: {0}")]
    MarginFailure(String),

    /// All lifted grid nodes are affinely degenerate.
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    /// Sample count must be positive.
    #[error("invalid sample count: {0}")]
    InvalidSampleCount(String),

    /// Malformed input value or file.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
