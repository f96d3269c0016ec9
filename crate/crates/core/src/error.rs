use std::io;
use std::path::PathBuf;

use crate::logit::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("no well-formed records among {lines} line(s) of {path}")]
    MalformedCorpus { path: PathBuf, lines: usize },

    #[error("line {line}: {message}")]
    SchemaViolation { line: usize, message: String },

    #[error("annotation backend failed on post {post_id}: {message}")]
    AnnotationBackend { post_id: String, message: String },

    #[error("no labeled sentences to build a distribution from")]
    EmptyDistribution,

    #[error("index {index} out of range 1..={len}")]
    Bounds { index: usize, len: usize },

    #[error("no emotion pair reaches min_support = {min_support}")]
    EmptyVocabulary { min_support: usize },

    #[error("outcome has a single class ({class}); both 0 and 1 are required")]
    DegenerateOutcome { class: u8 },

    #[error("column {column} ({name}) is constant")]
    ConstantColumn { column: usize, name: String },

    #[error("separation detected: {message}; consider a ridge penalty (--ridge)")]
    SeparationDetected { message: String },

    #[error("no convergence after {} iterations", .partial.iterations)]
    NotConverged { partial: Box<FitResult> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "Io",
            Error::MalformedCorpus { .. } => "MalformedCorpus",
            Error::SchemaViolation { .. } => "SchemaViolation",
            Error::AnnotationBackend { .. } => "AnnotationBackend",
            Error::EmptyDistribution => "EmptyDistribution",
            Error::Bounds { .. } => "Bounds",
            Error::EmptyVocabulary { .. } => "EmptyVocabulary",
            Error::DegenerateOutcome { .. } => "DegenerateOutcome",
            Error::ConstantColumn { .. } => "ConstantColumn",
            Error::SeparationDetected { .. } => "SeparationDetected",
            Error::NotConverged { .. } => "NotConverged",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
