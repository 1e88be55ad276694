use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GfdcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GfdcError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input data. `row` and `column` are 1-based positions in the
    /// source file (the header, if any, is row 1).
    #[error("row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("neighbor count k = {k} is out of range for {n} samples (need 1 <= k <= {})", .n.saturating_sub(1))]
    KOutOfRange { k: usize, n: usize },

    #[error("sample sets must be nonempty and disjoint")]
    InvalidSampleSets,

    #[error("total conflict between mass functions (K = 1)")]
    TotalConflict,

    #[error("cannot form {requested} clusters: at most {available} stable samples are available")]
    Unsatisfiable { requested: usize, available: usize },

    #[error("label sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
}
