use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("structure {structure} cannot take {object} objects")]
    KindMismatch { structure: String, object: String },
    #[error("structure {structure} does not support {op}")]
    Unsupported { structure: String, op: String },
    #[error("event {step}: {source}")]
    Structure {
        step: usize,
        #[source]
        source: cfcolor::Error,
    },
    #[error("report encoding failed: {0}")]
    Encode(String),
}

impl HarnessError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
