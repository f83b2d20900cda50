use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced anywhere in the pipeline, from file loading through the
/// iterative solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {path}")]
    MissingFile { path: PathBuf },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// 0-based data coordinates; a detected header line does not count as a
    /// data row.
    #[error("parse error at row {row}, column {col}: {detail}")]
    ParseError {
        row: usize,
        col: usize,
        detail: String,
    },

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("invalid labels: {0}")]
    InvalidLabels(String),

    #[error("label {label} out of range 1..={num_classes}")]
    LabelOutOfRange { label: i64, num_classes: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("neighbor count {p} out of range for {n} samples (need 1 <= p < n)")]
    InvalidNeighborCount { p: usize, n: usize },

    #[error("row {0} has zero norm; cosine similarity undefined")]
    ZeroRow(usize),

    #[error("affinity matrix is not symmetric")]
    AsymmetricInput,

    #[error("source and target domains must both be nonempty")]
    EmptyDomain,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear system singular after {retries} jitter retries")]
    SingularSystem { retries: usize },

    #[error("non-finite coefficients at outer iteration {iteration}")]
    NonFiniteIterate { iteration: usize },
}

impl Error {
    /// True for failures of the numerical solvers themselves, as opposed to
    /// bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem { .. } | Error::NonFiniteIterate { .. }
        )
    }
}
