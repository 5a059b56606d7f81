use spi_tensor::TensorError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("window does not tile the scene: {0}")]
    Tiling(String),
    #[error("out of bounds: {0}")]
    Bounds(String),
    #[error("inconsistent inputs: {0}")]
    Consistency(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("cannot resize: {0}")]
    Resize(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Tiling(_) => "tiling",
            Error::Bounds(_) => "bounds",
            Error::Consistency(_) => "consistency",
            Error::Shape(_) => "shape",
            Error::Resize(_) => "resize",
            Error::Config(_) => "config",
            Error::Data(_) => "data",
            Error::Format(_) => "format",
            Error::Tensor(TensorError::Load(_)) => "load",
            Error::Tensor(_) => "tensor",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
