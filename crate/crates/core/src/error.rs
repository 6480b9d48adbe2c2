use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violated an operation's precondition (lengths, grids, finite values).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The grid cannot resolve the requested field or rescaling.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A quantity cannot be computed to the accuracy its consumer expects.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
