use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid sparse vector: {0}")]
    InvalidVector(&'static str),
    #[error("cannot normalize empty document")]
    ZeroVector,
    #[error("document {0:?} has no weighted terms")]
    EmptyDocument(String),
    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),
    #[error("corpus must contain at least one document")]
    EmptyCorpus,
    #[error("count for term {term:?} in document {doc:?} must be positive")]
    NonPositiveCount { doc: String, term: String },
    #[error("corpus was built from pre-weighted vectors and has no vocabulary")]
    NoVocabulary,
    #[error("numerical drift: residual norm squared {0:e} is negative")]
    NumericalDrift(f64),
    #[error("degenerate pivot: residual norm squared {0:e} is inside the current span")]
    DegeneratePivot(f64),
    #[error("node cannot be split: all coordinates are identical")]
    UnsplittableNode,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("gamma {0} is outside (0, 1]")]
    InvalidGamma(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("ranked list contains a duplicate id at position {0}")]
    DuplicateRankedId(usize),
    #[error("ground-truth list is empty")]
    EmptyTruth,
}
