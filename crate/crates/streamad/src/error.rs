use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty hash key")]
    EmptyHashKey,
    #[error("column index out of range: {index} >= {columns}")]
    ColumnIndexOutOfRange { index: usize, columns: usize },
    #[error("row count mismatch: expected {expected}, got {got}")]
    RowCountMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("detector is not calibrated")]
    Uncalibrated,
    #[error("empty calibration prefix")]
    EmptyPrefix,
    #[error("empty score series")]
    EmptySeries,
    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("weighted combination requires a weight vector")]
    MissingWeights,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("contamination must lie in (0,1), got {0}")]
    InvalidContamination(f64),
    #[error("degenerate ground truth: both classes required")]
    DegenerateGroundTruth,
    #[error("unknown detector kind: {0}")]
    UnknownDetector(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("label values must be 0 or 1, got {0}")]
    NonBinaryLabel(f64),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("row {row}: expected {expected} fields, got {got}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("row {row}, column {column}: cannot parse '{value}' as a number")]
    BadNumber {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("unknown slot: {0}")]
    UnknownSlot(String),
    #[error("unknown dataset: {0}")]
    UnknownDataset(String),
    #[error("stream length mismatch: {0}")]
    StreamLengthMismatch(String),
    #[error("slot capacity exceeded: {slot} allows {capacity} sub-detectors, requested {requested}")]
    CapacityExceeded {
        slot: String,
        capacity: usize,
        requested: usize,
    },
    #[error("slot kind mismatch: {0}")]
    KindMismatch(String),
    #[error("pipeline validation failed:\n{0}")]
    InvalidPipeline(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
