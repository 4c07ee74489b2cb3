use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("direction #{index} has norm {norm}, expected a unit vector")]
    NonUnitDirection { index: usize, norm: f64 },

    #[error("direction set is empty or generates only the zero cone")]
    EmptyDirectionSet,

    #[error("inconsistent cone representation: {0}")]
    InconsistentCone(String),

    #[error("operation requires a convex direction cone: {0}")]
    NonConvexCone(String),

    #[error("operation requires a polyhedral mapping (linearize the catalog map first)")]
    NotPolyhedral,

    #[error("point is not in the set (violation {violation:e})")]
    PointNotInSet { violation: f64 },

    #[error("invalid rate function: {0}")]
    InvalidRate(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covering step infeasible at iterate {iterate}: residual {residual:e} exceeds bound {bound:e}")]
    CoveringInfeasible { iterate: usize, residual: f64, bound: f64 },

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
