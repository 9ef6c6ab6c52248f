use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing file: {0}")]
    MissingFile(PathBuf),

    #[error("{file}:{row}: {msg}")]
    Parse {
        file: String,
        row: usize,
        msg: String,
    },

    #[error("{file}: dimension mismatch: {msg}")]
    Dimension { file: String, msg: String },

    #[error("invariant '{name}' violated in {file} (row {row}): {detail}")]
    Invariant {
        name: &'static str,
        file: String,
        row: usize,
        detail: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(file: impl Into<String>, row: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            row,
            msg: msg.into(),
        }
    }

    pub fn dimension(file: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Dimension {
            file: file.into(),
            msg: msg.into(),
        }
    }

    pub fn invariant(
        name: &'static str,
        file: impl Into<String>,
        row: usize,
        detail: impl Into<String>,
    ) -> Self {
        Error::Invariant {
            name,
            file: file.into(),
            row,
            detail: detail.into(),
        }
    }
}
