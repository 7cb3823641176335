use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix of size {size} exceeds the permanent size guard of {max}")]
    TooLarge { size: usize, max: usize },

    #[error("photon number not conserved: {0}")]
    Conservation(String),

    #[error("fidelity undefined for a zero-norm matrix")]
    UndefinedFidelity,

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("non-finite objective value: {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid gate document: {0}")]
    Gate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
