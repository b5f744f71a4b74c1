use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// A value was passed in the wrong representation (e.g. a space-domain
    /// field where a frequency-domain one is required).
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A symbol returned a non-finite value.
    #[error("symbol evaluation failed at xi = {point:?}: {message}")]
    Evaluation { point: Vec<f64>, message: String },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Prefixes the message with `ctx` (e.g. the failing scale).
    pub fn context(self, ctx: &str) -> Self {
        match self {
            Error::Contract(m) => Error::Contract(format!("{ctx}: {m}")),
            Error::Parameter(m) => Error::Parameter(format!("{ctx}: {m}")),
            Error::Evaluation { point, message } => Error::Evaluation { point, message: format!("{ctx}: {message}") },
            Error::Precondition(m) => Error::Precondition(format!("{ctx}: {m}")),
            Error::Construction(m) => Error::Construction(format!("{ctx}: {m}")),
            Error::Numerical(m) => Error::Numerical(format!("{ctx}: {m}")),
            Error::Unsupported(m) => Error::Unsupported(format!("{ctx}: {m}")),
            Error::Format(m) => Error::Format(format!("{ctx}: {m}")),
            Error::Io(e) => Error::Io(std::io::Error::new(e.kind(), format!("{ctx}: {e}"))),
        }
    }

    /// True for errors caused by the request itself rather than the computation.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Contract(_) | Error::Parameter(_) | Error::Unsupported(_) | Error::Format(_))
    }
}
