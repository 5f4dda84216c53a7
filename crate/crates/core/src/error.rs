use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A record in an input file could not be parsed or failed validation.
    /// `record` is 1-based.
    #[error("{file}: record {record}: field `{field}`: {message}")]
    Record {
        file: String,
        record: usize,
        field: String,
        message: String,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("pattern config: {0}")]
    Pattern(String),

    #[error("lexicon {resource}: {message}")]
    Lexicon { resource: String, message: String },

    #[error("training failed: {0}")]
    Training(String),

    #[error("model file: {0}")]
    Model(String),

    #[error("aggregation: {0}")]
    Aggregation(String),

    #[error("evaluation: {0}")]
    Evaluation(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn record(
        file: impl Into<String>,
        record: usize,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Record {
            file: file.into(),
            record,
            field: field.into(),
            message: message.into(),
        }
    }

    /// Whether the error comes from bad input data rather than a failed fit.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Training(_))
    }
}
