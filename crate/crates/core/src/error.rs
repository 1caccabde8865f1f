use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("kernel value {value} exceeds the norm {eta}; filters are not normalised")]
    NotNormalized { value: f64, eta: f64 },

    /// A row or column of the rectified kernel integrates to zero, so the
    /// transition operator cannot be normalised.
    #[error("degenerate normalisation: {what} integral vanishes at grid point {index}")]
    Degenerate { index: usize, what: &'static str },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed {format} data: {reason}")]
    Malformed { format: &'static str, reason: String },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn malformed(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Malformed { format, reason: reason.into() }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Degenerate { .. } | Error::NotNormalized { .. } => 3,
            Error::Io(_) | Error::Malformed { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
