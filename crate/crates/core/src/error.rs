use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input: at least one hypothesis is required")]
    EmptyInput,

    #[error("malformed value for hypothesis `{id}`: {reason}")]
    MalformedValue { id: String, reason: String },

    #[error("length mismatch: expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("lambda must lie in {range}, got {value}")]
    BadLambda { value: f64, range: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    BadParameter { name: &'static str, reason: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("replicates must be at least 1")]
    NoReplicates,

    #[error("replicate {index} failed: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn malformed(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::MalformedValue {
            id: id.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::BadParameter {
            name,
            reason: reason.into(),
        }
    }
}
