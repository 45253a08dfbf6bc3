//! Crate-wide error type.

/// Errors reported by geometry, integration, closed-form evaluation and
/// verification. Payloads are `f64` regardless of the scalar the computation
/// ran in; they are diagnostic only.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Frame index outside 1..=3 in a connection-table lookup.
    #[error("frame index out of range: ({i}, {j}), expected 1..=3")]
    FrameIndex { i: usize, j: usize },

    /// Adaptive step size fell below the configured minimum; the solution is
    /// stiff or blowing up near `t`.
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    /// A non-finite state component appeared during integration.
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    /// Adaptive quadrature could not meet the requested tolerance.
    #[error("quadrature failure: requested {requested}, achieved {achieved}")]
    QuadratureFailure { requested: f64, achieved: f64 },

    /// A reduced-equation orbit escapes to infinity before the requested grid
    /// end; `escape_t` estimates the blow-up time.
    #[error("unbounded orbit escapes near t = {escape_t}")]
    UnboundedOrbit { escape_t: f64 },

    /// Operation only defined for the c = 0 reduction.
    #[error("unsupported reduction: {0}")]
    Unsupported(String),

    /// Finite-difference residual evaluation needs more grid points.
    #[error("grid too coarse: need at least {need} samples, got {got}")]
    GridTooCoarse { need: usize, got: usize },

    /// Finite-difference residual evaluation needs uniform spacing.
    #[error("grid spacing is not uniform (max deviation {max_dev})")]
    NonUniformGrid { max_dev: f64 },

    /// Two objects being compared were built with different model parameters.
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
}

pub type Result<T> = core::result::Result<T, Error>;
