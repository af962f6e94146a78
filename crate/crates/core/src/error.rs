use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("duplicate label `{0}` in vocabulary")]
    DuplicateLabel(String),

    #[error("vocabulary {0} contains no labels")]
    EmptyVocabulary(PathBuf),

    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown label `{label}`{}", fmt_line(*.line))]
    UnknownLabel { label: String, line: Option<usize> },

    #[error("duplicate id `{id}`{}", fmt_line(*.line))]
    DuplicateId { id: String, line: Option<usize> },

    #[error("example `{id}` has no labels{}", fmt_line(*.line))]
    MissingLabels { id: String, line: Option<usize> },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("vocabulary mismatch: expected hash {expected}, found {found}")]
    VocabularyMismatch { expected: String, found: String },

    #[error("id sets differ (missing: {missing:?}, extra: {extra:?})")]
    IdMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("oversample plan references unknown id `{0}`")]
    UnknownPlanId(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("config: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

fn fmt_line(line: Option<usize>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
