use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument or configuration value is outside the model's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numeric error in {routine}: {message} (partial estimate {partial:e}, error estimate {error:e})")]
    Numeric { routine: &'static str, message: String, partial: f64, error: f64 },

    /// The requested regime is not covered by the closed-form results.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Derived quantities contradict each other (e.g. load on a node type with no nodes).
    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),

    #[error("simulation error: {0}")]
    Simulation(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
