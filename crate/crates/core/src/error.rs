use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its contract.
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    /// A loss or likelihood was asked to evaluate outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "grid too coarse: expected jump count {expected:.4} at step {step}, atom {atom} \
         exceeds {threshold}; increase steps"
    )]
    Refinement {
        step: usize,
        atom: usize,
        expected: f64,
        threshold: f64,
    },

    #[error("observed jump at step {step}, atom {atom} has zero intensity under every hypothesis")]
    Inconsistent { step: usize, atom: usize },

    #[error("unsupported scenario: {0}")]
    Unsupported(String),

    #[error("path {path} (seed {seed:#018x}) failed: {source}")]
    Path {
        path: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input (as opposed to runtime failures).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Validation { .. } | Error::Unsupported(_) | Error::Json(_) => true,
            Error::Path { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
