use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("header mismatch: schema columns {expected:?} but file has {found:?}")]
    HeaderMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("table has no data rows")]
    EmptyTable,

    #[error("non-numeric value {token:?} in continuous column {column:?} at row {row}")]
    NonNumericCell {
        column: String,
        row: usize,
        token: String,
    },

    #[error("unknown category {token:?} in column {column:?} at row {row}")]
    UnknownCategory {
        column: String,
        row: usize,
        token: String,
    },

    #[error("missing value in column {column:?} at row {row}")]
    MissingValue { column: String, row: usize },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("target column {0:?} not found")]
    TargetNotFound(String),

    #[error("column {0:?} has a single distinct value")]
    DegenerateColumn(String),

    #[error("stratified split failed: {0}")]
    Stratification(String),

    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),

    #[error("report version mismatch: expected {expected}, found {found}")]
    ReportVersion { expected: u32, found: u32 },

    #[error("malformed report: {0}")]
    ReportFormat(String),

    #[error("sample length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("association matrices have different labels or kinds")]
    LabelMismatch,

    #[error("no encoded width provided for feature {0:?}")]
    WidthMissing(String),

    #[error("cannot fit a mixture: all samples are equal")]
    AllEqualSamples,

    #[error("encoded vector has width {found}, expected {expected}")]
    VectorWidth { expected: usize, found: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty batch")]
    EmptyBatch,

    #[error("training diverged at epoch {epoch}: {loss} is non-finite")]
    Diverged { epoch: usize, loss: String },

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("cannot synthesize zero rows")]
    ZeroSampleCount,

    #[error("synthetic table has {synth} rows, outside [{lo}, {hi}] for a training set of {train}")]
    SynthSizeOutOfRange {
        synth: usize,
        train: usize,
        lo: usize,
        hi: usize,
    },

    #[error("sensitivity experiment failed: {0}")]
    Sensitivity(String),

    #[error("tables have different schemas: {0}")]
    SchemaMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
