use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the analytics pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: field `{field}`: {message}")]
    Parse {
        row: usize,
        field: String,
        message: String,
    },

    #[error("duplicate timestamp {timestamp} for team `{team}` (add a `seq` column to order same-second posts)")]
    DuplicateTimestamp { team: String, timestamp: String },

    #[error("invalid emotion distribution: {0}")]
    InvalidDistribution(String),

    #[error("insufficient events: need at least {needed}, found {found}")]
    InsufficientEvents { needed: usize, found: usize },

    #[error("degenerate sequence: {0}")]
    DegenerateSequence(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("design matrix is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("design matrix has {rows} rows but needs at least {needed} ({columns} columns + 1)")]
    TooFewObservations {
        rows: usize,
        columns: usize,
        needed: usize,
    },

    #[error("R² is undefined for a response with zero variance")]
    UndefinedRSquared,

    #[error("unknown predictor `{0}`")]
    UnknownPredictor(String),

    #[error("no metadata for team `{0}`")]
    MissingMetadata(String),

    #[error("input path does not exist: {}", .0.display())]
    MissingPath(PathBuf),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(row: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            row,
            field: field.into(),
            message: message.into(),
        }
    }

    /// Attaches the file a lower-level error came from.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
