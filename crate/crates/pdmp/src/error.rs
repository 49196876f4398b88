use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set violates the constraints of a type.
    #[error("invalid parameters: {0}")]
    InvalidSpec(String),

    /// An operation was requested outside the switching regime where it is defined.
    #[error("regime error: {0}")]
    Regime(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// A statistical estimator received too little data.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}

pub type Result<T> = std::result::Result<T, Error>;
