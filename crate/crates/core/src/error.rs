use thiserror::Error;

/// Errors produced anywhere in the simulation chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid constellation: {0}")]
    Constellation(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("unknown scenario `{name}`; available scenarios: {available}")]
    UnknownScenario { name: String, available: String },

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn dim(expected: usize, actual: usize) -> Self {
        Error::Dimension { expected, actual }
    }

    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for numeric failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::Dimension { .. }
            | Error::Constellation(_)
            | Error::UnknownScenario { .. }
            | Error::Json(_) => 2,
            Error::Numeric(_) | Error::Metric(_) | Error::Calibration(_) => 3,
            Error::Scenario { source, .. } => source.exit_code(),
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}
