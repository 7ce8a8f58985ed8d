use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("column `{0}` is missing from the CSV header")]
    MissingColumn(String),

    #[error("CSV column `{0}` is not declared in the schema")]
    UndeclaredColumn(String),

    #[error("row {row}, column `{column}`: missing value")]
    MissingValue { row: u64, column: String },

    #[error("row {row}, column `{column}`: `{value}` is not a number")]
    BadNumber { row: u64, column: String, value: String },

    #[error("row {row}, column `{column}`: unseen category `{value}`")]
    UnseenCategory { row: u64, column: String, value: String },

    #[error("row {row}: label `{value}` is not a declared label value")]
    BadLabel { row: u64, value: String },

    #[error("cannot stratify: {0}")]
    Stratify(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("acquisition budget exceeded at step {step}: requested {requested} rows, {remaining} left in the pool")]
    BudgetExceeded {
        step: u64,
        requested: usize,
        remaining: usize,
    },

    #[error("too few rows: need at least {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("encoding signature mismatch: model trained on {trained}, input encoded for {given}")]
    SignatureMismatch { trained: String, given: String },

    #[error("no delivered data to select from")]
    NoData,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{method} seed {seed}: accounting violation: {detail}")]
    Accounting {
        method: String,
        seed: u64,
        detail: String,
    },

    #[error("run with seed {seed} failed: {source}")]
    Run {
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
