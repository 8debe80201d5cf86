use thiserror::Error;

use crate::cells::Action;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("action {action:?} is not legal in cell {cell}")]
    IllegalAction { cell: usize, action: Action },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("non-finite gradient at hand {hands}: {detail}")]
    NonFiniteGradient { hands: u64, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
