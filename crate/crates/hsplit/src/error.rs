use thiserror::Error;

/// Errors surfaced by geometry, prox, iteration and oracle routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or point violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point does not belong to the space it was used with.
    #[error("point not in space: {0}")]
    NotInSpace(String),

    /// An objective has no minimizer over the searched set.
    #[error("no minimum found: {0}")]
    NoMinimum(String),

    /// A constrained search saw only infeasible candidates.
    #[error("no feasible point: {0}")]
    NoFeasiblePoint(String),

    /// A supplied solution pair fails the fixed-point residual test.
    #[error("invalid reference solution: {0}")]
    InvalidReference(String),

    /// Two routes that must agree disagreed; points at a computational bug.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
