use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data is malformed (non-finite values, ragged rows, too few rows).
    #[error("data error: {0}")]
    Data(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or matrix dimensions do not agree.
    #[error("shape error: {0}")]
    Shape(String),

    /// An interaction index does not fit the shape it is used with.
    #[error("index {index} out of range for {len} interactions")]
    Index { index: u64, len: u64 },

    /// A matrix that has to be inverted is singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// The hypothesis of an identity does not hold, so it says nothing.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("null cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
