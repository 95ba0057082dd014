use thiserror::Error;

/// Errors shared across the solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The follower has no feasible solution (e.g. a set family that cannot cover).
    #[error("follower infeasible: {0}")]
    FollowerInfeasible(String),

    /// An exhaustive enumeration was requested beyond the configured cap.
    #[error("instance too large for oracle: {0}")]
    InstanceTooLarge(String),

    /// The toll-free items alone cannot cover what the bound computation needs.
    #[error("toll-free cover assumption violated: {0}")]
    TollFreeCoverViolated(String),

    /// A diagram has no path from the root to the terminal.
    #[error("no terminal path in diagram")]
    NoTerminalPath,

    /// The LP iteration cap was exhausted without convergence.
    #[error("lp stalled after {0} pivots")]
    LpStalled(usize),

    /// The LP relaxation is unbounded, so the model is ill-posed.
    #[error("model unbounded")]
    Unbounded,

    /// A full-diagram expansion exceeded its size cap.
    #[error("diagram size cap exceeded: {0}")]
    SizeCapExceeded(String),

    /// Instance data violates a structural precondition.
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A solver or CLI configuration is inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
