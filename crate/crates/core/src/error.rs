use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("no homogeneous score for kind {0}")]
    MissingKind(String),

    #[error("roster size mismatch: expected {expected} agents, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("ratio {ratio} cannot be realized with {size} agents")]
    RatioInfeasible { ratio: String, size: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
