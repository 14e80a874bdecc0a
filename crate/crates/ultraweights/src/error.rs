use thiserror::Error;

/// Failure modes shared by every numerical operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A supremum or count reached the last available sequence index.
    #[error("truncated at index {index}: {context}")]
    Truncation { index: u64, context: String },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("objective not concave near y = {at}")]
    NonConcave { at: f64 },
    #[error("search unbounded: {0}")]
    Unbounded(String),
    #[error("divergent: {0}")]
    Divergence(String),
    #[error("integrability failure: {0}")]
    Integrability(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("numerical budget exhausted: {0}")]
    Budget(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Whether the failure comes from an exhausted iteration or node budget.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::Budget(_) | Error::Unbounded(_) | Error::Truncation { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
