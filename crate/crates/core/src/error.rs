use thiserror::Error;

/// Errors raised across the optimization library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("unknown problem `{name}`; valid names: {}", valid.join(", "))]
    NotFound { name: String, valid: Vec<String> },

    #[error("singular system: columns {columns:?} are linearly dependent on earlier columns")]
    Singular { columns: Vec<usize> },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("undefined scale: {0}")]
    UndefinedScale(String),

    #[error("no valid point found in response")]
    ParseFailure,

    #[error("operator failed after {attempts} attempts")]
    OperatorFailure { attempts: usize },

    #[error("backend error: {0}")]
    Backend(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite objective value at evaluation {evaluation}: x = {x:?}, f = {f:?}")]
    NonFinite {
        evaluation: u64,
        x: Vec<f64>,
        f: Vec<f64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
