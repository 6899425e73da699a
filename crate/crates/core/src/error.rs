use thiserror::Error;

/// Errors produced by fitting, evaluation, data handling and persistence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `max` carries the largest admissible value when one is known.
    #[error("dimension error: {msg}")]
    Dimension { msg: String, max: Option<usize> },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("attribute {attribute} has fewer than two groups present")]
    DegenerateAttribute { attribute: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse {
        row: usize,
        col: String,
        msg: String,
    },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension {
            msg: msg.into(),
            max: None,
        }
    }

    pub(crate) fn dim_max(msg: impl Into<String>, max: usize) -> Self {
        Error::Dimension {
            msg: msg.into(),
            max: Some(max),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
