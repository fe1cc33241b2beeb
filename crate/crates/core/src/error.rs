use thiserror::Error;

/// Errors surfaced by model evaluation, solvers, and configuration.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter set violates a maintained restriction.
    #[error("invalid parameters: {0}")]
    Params(String),

    /// A scalar solver exhausted its iteration budget.
    #[error("{what}: no convergence, last residual {residual:e}")]
    NoConvergence { what: &'static str, residual: f64 },

    /// A sign change could not be established where one was expected.
    /// Carries residual samples for diagnosis.
    #[error("bracketing failed: {context}; samples {samples:?}")]
    Bracket {
        context: String,
        samples: Vec<(f64, f64)>,
    },

    /// Configuration ingestion or validation failed.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn params(msg: impl Into<String>) -> Self {
        Error::Params(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
