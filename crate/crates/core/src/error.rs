use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Evaluation outside the set where a quantity is defined (axis, origin, negative argument).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Each entry names the violated hypothesis and the failed predicate.
    #[error("configuration rejected: {}", .0.join("; "))]
    Hypotheses(Vec<String>),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("degenerate ray: {0}")]
    RayDegenerate(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
