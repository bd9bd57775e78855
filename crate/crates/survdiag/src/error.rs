use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular design matrix: {0}")]
    SingularDesign(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
