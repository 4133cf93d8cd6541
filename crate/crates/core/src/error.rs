use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The underlying CSV reader rejected a record.
    #[error("row {row}: malformed record: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("missing required column {0:?} in header")]
    MissingColumn(&'static str),

    #[error("row {row}: field {field:?}: {message}")]
    BadField {
        row: usize,
        field: &'static str,
        message: String,
    },

    #[error("row {row}: offset {offset} is out of bounds for text of {len} characters")]
    OffsetOutOfBounds { row: usize, offset: i64, len: usize },

    #[error("line {line}: {message}")]
    BadPrediction { line: usize, message: String },

    #[error("duplicate prediction id {0}")]
    DuplicateId(usize),

    #[error("no prediction for post {0}")]
    MissingPrediction(usize),

    #[error("prediction for unknown post {0}")]
    UnknownPrediction(usize),

    #[error("range [{start}, {end}) is invalid for text of {len} characters")]
    RangeOutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("ranges [{0}, {1}) and [{2}, {3}) overlap")]
    OverlappingRanges(usize, usize, usize, usize),

    #[error("empty range at {0}")]
    EmptyRange(usize),

    #[error("phrase {0:?} not found in remaining text")]
    PhraseNotFound(String),

    #[error("k must satisfy 2 <= k <= {records}, got {k}")]
    InvalidFoldCount { k: usize, records: usize },

    #[error("toxic fraction is undefined for an empty text")]
    EmptyText,

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("gate training needs both toxic and non-toxic posts")]
    SingleClass,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("model document: {0}")]
    ModelFormat(String),

    #[error("unsupported {kind} version {found} (expected {expected})")]
    UnsupportedVersion {
        kind: &'static str,
        found: u32,
        expected: u32,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A library invariant was broken; indicates a bug rather than bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
