use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates the operation's preconditions.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The requested combination of operator, family and parameters is not
    /// meaningful (e.g. a Copson-side operator with a shrinking family).
    #[error("invalid configuration [{code}]: {message}")]
    Config { code: &'static str, message: String },

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Evaluation requested at a point where the operator is singular.
    #[error("singular point x = {0}")]
    Singular(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn config(code: &'static str, msg: impl Into<String>) -> Self {
        Error::Config { code, message: msg.into() }
    }

    /// Short machine-readable name of the error class.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Config { code, .. } => code,
            Error::Numeric(_) => "numeric",
            Error::Singular(_) => "singular",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    /// Process exit code: 2 for usage/parameter problems, 3 for numeric ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) | Error::Singular(_) => 3,
            _ => 2,
        }
    }
}
