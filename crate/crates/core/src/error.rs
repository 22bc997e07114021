use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("assumption {assumption} violated: {detail}")]
    Assumption { assumption: &'static str, detail: String },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("training diverged at iteration {iteration}: objective {objective:e} exceeds 10x the initial {initial:e}")]
    Divergence { iteration: usize, objective: f64, initial: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
