use thiserror::Error;

/// Errors raised by the planner library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown {kind}: {name}")]
    Lookup { kind: &'static str, name: String },

    #[error("validation failed: {0}")]
    Validation(String),

    /// The observation has zero likelihood under the current belief and action.
    #[error("zero-probability evidence: observation {obs} after action {action}")]
    ZeroProbabilityEvidence { action: usize, obs: usize },

    #[error("{what} is too large: about {estimate:.3e} terms (limit {limit:.3e})")]
    TooLarge {
        what: &'static str,
        estimate: f64,
        limit: f64,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn lookup(kind: &'static str, name: impl ToString) -> Self {
        Error::Lookup {
            kind,
            name: name.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
