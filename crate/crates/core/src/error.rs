use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unknown vertex: {0}")]
    Lookup(String),

    #[error("family error: {0}")]
    Family(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
