use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows} rows, {len} entries)")]
    NotSquare { rows: usize, len: usize },

    #[error("matrix is not symmetric at ({i}, {j}): {a} vs {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("negative entry {value} at ({i}, {j}) where a non-negative matrix is required")]
    NegativeEntry { i: usize, j: usize, value: f64 },

    #[error("instance assumption violated: {0}")]
    Assumption(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("problem dimension {n} exceeds the exhaustive-search cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
