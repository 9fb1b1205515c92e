use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Each variant maps to a stable, machine-readable code through [`Error::code`],
/// which the command-line tool prints on its error stream.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("failed to parse {context}: {message}")]
    Parse { context: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid concept id {0:?}: ids must be non-empty without surrounding whitespace")]
    InvalidId(String),

    #[error("duplicate concept id {0:?}")]
    DuplicateId(String),

    #[error("concept {concept:?} lists unknown parent {parent:?}")]
    UnknownParent { concept: String, parent: String },

    #[error("is-a edges contain a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("concept {0:?} cannot reach the root")]
    UnreachableRoot(String),

    #[error("invalid concept {concept:?}: {reason}")]
    InvalidConcept { concept: String, reason: String },

    #[error("unknown concept {0:?}")]
    UnknownConcept(String),

    #[error("label {0:?} is not part of the similarity matrix")]
    LabelNotInMatrix(String),

    #[error("malformed similarity matrix for item {item:?}: {reason}")]
    MalformedMatrix { item: String, reason: String },

    #[error("cell ({row:?}, {col:?}) of item {item:?} is {value}, outside [{min}, {max}]")]
    OutOfBoundsCell {
        item: String,
        row: String,
        col: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("unknown measure {0:?} (expected \"feature\" or \"path\")")]
    UnknownMeasure(String),

    #[error("label {0:?} is not part of the vocabulary")]
    VocabularyMismatch(String),

    #[error("confusion matrices have different row/column scaffolding")]
    ScaffoldMismatch,

    #[error("dataset contains no items")]
    EmptyDataset,

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("item {item:?} repeats label {label:?}")]
    DuplicateLabel { item: String, label: String },

    #[error("duplicate item id {0:?}")]
    DuplicateItemId(String),

    #[error("no similarity matrix supplied for item {0:?}")]
    MissingItem(String),

    #[error("similarity matrix supplied for unknown item {0:?}")]
    UnexpectedItem(String),

    #[error("similarity matrix labels of item {item:?} do not match its {side} labels")]
    LabelSetMismatch { item: String, side: String },

    #[error("item {0:?} declares a different measure than the rest of the run")]
    MeasureMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Stable error code, independent of the human-readable message.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "PARSE_ERROR",
            Error::Io(_) => "IO_ERROR",
            Error::InvalidId(_) => "INVALID_ID",
            Error::DuplicateId(_) => "DUPLICATE_ID",
            Error::UnknownParent { .. } => "UNKNOWN_PARENT",
            Error::Cycle(_) => "CYCLE",
            Error::UnreachableRoot(_) => "UNREACHABLE_ROOT",
            Error::InvalidConcept { .. } => "INVALID_CONCEPT",
            Error::UnknownConcept(_) => "UNKNOWN_CONCEPT",
            Error::LabelNotInMatrix(_) => "LABEL_NOT_IN_MATRIX",
            Error::MalformedMatrix { .. } => "MALFORMED_MATRIX",
            Error::OutOfBoundsCell { .. } => "OUT_OF_BOUNDS_CELL",
            Error::InvalidMeasure(_) => "INVALID_MEASURE",
            Error::UnknownMeasure(_) => "UNKNOWN_MEASURE",
            Error::VocabularyMismatch(_) => "VOCABULARY_MISMATCH",
            Error::ScaffoldMismatch => "SCAFFOLD_MISMATCH",
            Error::EmptyDataset => "EMPTY_DATASET",
            Error::EmptyVocabulary => "EMPTY_VOCABULARY",
            Error::DuplicateLabel { .. } => "DUPLICATE_LABEL",
            Error::DuplicateItemId(_) => "DUPLICATE_ITEM_ID",
            Error::MissingItem(_) => "MISSING_ITEM",
            Error::UnexpectedItem(_) => "UNEXPECTED_ITEM",
            Error::LabelSetMismatch { .. } => "LABEL_SET_MISMATCH",
            Error::MeasureMismatch(_) => "MEASURE_MISMATCH",
            Error::Config(_) => "CONFIG_ERROR",
        }
    }

    pub(crate) fn parse(context: &str, err: impl std::fmt::Display) -> Self {
        Error::Parse {
            context: context.to_string(),
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
