use thiserror::Error;

/// Errors reported by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(&'static str),

    #[error("non-finite input")]
    NonFinite,

    #[error("contour quadrature failed: {0}")]
    Contour(&'static str),

    #[error("contour level {level}: reconstruction error {achieved:.3e} exceeds {target:.3e}")]
    Reconstruction { level: usize, achieved: f64, target: f64 },

    #[error("linear solver failure: {0}")]
    Solver(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("history out of sync: expected step {expected}, got {got}")]
    OutOfOrder { expected: usize, got: usize },

    #[error("history capacity exceeded at step {0}")]
    Capacity(usize),

    #[error("direct history needs {needed} stored values, budget is {budget}; use fast mode")]
    MemoryBudget { needed: usize, budget: usize },

    #[error("initial data violates the boundary constraint (residual {0:.3e})")]
    Boundary(f64),

    #[error("energy blow-up detected at step {0}")]
    BlowUp(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
