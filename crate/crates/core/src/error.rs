use thiserror::Error;

/// Every fallible operation in the crate reports through this type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("non-finite value encountered: {0}")]
    Numeric(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("no convergence after {iterations} iterations (last residual {last:.3e})")]
    Convergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("policy iteration cycled after {iterations} updates (period {period})")]
    Cycling { iterations: usize, period: usize },

    #[error("ladder rung {rung} failed: {source}")]
    Ladder {
        rung: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("escalation failed: {0}")]
    Escalation(String),

    #[error("rate fit failed: {0}")]
    Fit(String),

    #[error("linear solve failed: {0}")]
    Linear(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable, machine-readable class name written into run manifests.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Domain(_) => "domain",
            Error::Numeric(_) => "numeric",
            Error::Input(_) => "input",
            Error::Convergence { .. } => "convergence",
            Error::Cycling { .. } => "cycling",
            Error::Ladder { .. } => "ladder",
            Error::Escalation(_) => "escalation",
            Error::Fit(_) => "fit",
            Error::Linear(_) => "linear",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
