//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("initialization error: {0}")]
    Init(String),

    #[error("sentence {index}: length mismatch (gold {gold} symbols, predicted {predicted})")]
    Alignment {
        index: usize,
        gold: usize,
        predicted: usize,
    },

    #[error("incomplete coverage for {context}: {} item(s) missing, first few: {}", missing.len(), preview(missing))]
    Coverage {
        context: String,
        missing: Vec<String>,
    },
}

fn preview(items: &[String]) -> String {
    let head: Vec<&str> = items.iter().take(5).map(String::as_str).collect();
    head.join(", ")
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
