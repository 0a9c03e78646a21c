use thiserror::Error;

/// Failures raised by the workbench. `Precondition` marks a numerical refusal:
/// an input outside the regime where a construction is valid.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition failed in {stage}: {detail}")]
    Precondition { stage: String, detail: String },
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("jet base mismatch: expected {expected}, found {found}")]
    BaseMismatch { expected: f64, found: f64 },
    #[error("root finding failed at {at}: {detail}")]
    RootFind { at: f64, detail: String },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("incompatible maps: {0}")]
    Incompatible(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    pub fn precondition(stage: &str, detail: impl Into<String>) -> Self {
        Error::Precondition { stage: stage.to_string(), detail: detail.into() }
    }

    /// True for refusals caused by inputs outside a construction's regime.
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::Precondition { .. } | Error::RootFind { .. } | Error::Integration(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
