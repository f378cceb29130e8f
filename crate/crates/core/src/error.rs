use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input from the caller: malformed descriptor, unknown property,
    /// out-of-range parameter.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("space mismatch: expected {expected}, got {got}")]
    SpaceMismatch { expected: String, got: String },

    #[error("generator certification failed at word {word}: {reason}")]
    Certification { word: String, reason: String },

    #[error("property is not bracketed on [0, {diameter}]: p(0) = {low}, p(diameter) = {high}")]
    NonBracketing { low: f64, high: f64, diameter: f64 },

    #[error("integer overflow in exact arithmetic: {0}")]
    Overflow(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("audit failure: {0}")]
    Audit(String),

    #[error("contraction bound violated: ratio {ratio} exceeds {bound} for h supported on {witness}")]
    Contraction { ratio: f64, bound: f64, witness: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// True for errors caused by caller input rather than a failed check.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Usage(_) | Error::SpaceMismatch { .. } | Error::Toml(_) | Error::SizeLimit(_)
        )
    }
}
