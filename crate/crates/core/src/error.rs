use alloc::string::String;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("duplicate text id {0}")]
    DuplicateId(usize),
    #[error("text ids must be dense in [0, {n}), found {id}")]
    SparseId { id: usize, n: usize },
    #[error("embedding row for id {id} is the zero vector")]
    ZeroEmbedding { id: usize },
    #[error("embedding row {row} has dimension {got}, expected {expected}")]
    RaggedEmbedding { row: usize, got: usize, expected: usize },
    #[error("corpus has {texts} texts but {rows} embedding rows")]
    RowCountMismatch { texts: usize, rows: usize },
    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("mean tokens per text must be positive, got {0}")]
    NonPositiveMeanTokens(f64),
    #[error("need at least {need} texts, got {got}")]
    TooFewTexts { need: usize, got: usize },
    #[error("cannot form {k} clusters from {n} points")]
    TooManyClusters { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pair ({a}, {b}) is both must-link and cannot-link")]
    ConflictingConstraint { a: usize, b: usize },
    #[error("constraint weight sign for ({a}, {b}) disagrees with its relation")]
    WeightSignMismatch { a: usize, b: usize },
    #[error("label vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Numerical(_) => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
