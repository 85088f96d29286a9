use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scenario infeasible: start-to-end distance {distance:.6} m exceeds travel budget {budget:.6} m")]
    InfeasibleScenario { distance: f64, budget: f64 },

    #[error("length mismatch: expected {expected} slots, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("power allocation factor {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("concavity condition violated for slot coefficients: {0}")]
    CoefficientCondition(String),

    #[error("surrogate undefined at slot {slot}: linearized eavesdropper distance left its domain")]
    SurrogateDomain { slot: usize },

    #[error("trajectory infeasible: {0}")]
    InfeasibleTrajectory(String),

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
