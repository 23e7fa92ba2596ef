use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid bump corners: {0}")]
    Corner(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("point outside the partition cells: {0}")]
    Domain(String),

    /// The generalized inverse of the modulus vanished, which happens when
    /// the distribution function has a jump.
    #[error("control function singular: {0}")]
    Singularity(String),

    #[error("non-finite moment: {0}")]
    Moment(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("resource budget exceeded: {0}")]
    Resource(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
