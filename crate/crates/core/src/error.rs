use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad class of a failure, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input data, files or configuration.
    Data,
    /// A numeric failure during training or inference.
    Numeric,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus line {line}: {message}")]
    Corpus { line: usize, message: String },

    #[error("record {id:?}: unknown stance {value:?} (expected pro or con)")]
    UnknownStance { id: String, value: String },

    #[error("duplicate instance id {id:?} at line {line}")]
    DuplicateId { id: String, line: usize },

    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },

    #[error("not an embedding file")]
    NotEmbeddingFile,

    #[error("unsupported embedding file version {0}")]
    UnsupportedVersion(u32),

    #[error("embedding file truncated at byte offset {offset} (needed {needed} more bytes)")]
    Truncated { offset: u64, needed: u64 },

    #[error("embedding file byte offset {offset}: {message}")]
    EmbeddingFormat { offset: u64, message: String },

    #[error("record {id:?} has dimension {found}, expected {expected}")]
    DimMismatch {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("no contextual embeddings for instance ids: {}", ids.join(", "))]
    MissingEmbeddings { ids: Vec<String> },

    #[error("embedding file does not match the corpus: {0}")]
    Validation(String),

    #[error("instance {0:?} not found")]
    UnknownInstance(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("unknown heatmap format {0:?} (expected json, html or ansi)")]
    UnknownFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonFinite(_) => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }
}
