//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input stream")]
    EmptyStream,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("labeling error at t={at}: {msg}")]
    LabelingError { at: f64, msg: String },

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("phase undefined at the origin (x, y) = (0, 0)")]
    UndefinedPhase,

    #[error("shape error: {0}")]
    ShapeError(String),

    #[error("invalid batch: {0}")]
    InvalidBatch(String),

    #[error("numerical error: {0}")]
    NumericalError(String),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("incompatible weights: {0}")]
    IncompatibleWeights(String),

    #[error("corrupt weight file: {0}")]
    CorruptFile(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
