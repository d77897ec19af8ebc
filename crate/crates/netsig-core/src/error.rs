use alloc::string::String;

use thiserror::Error;

/// Errors raised by the selection toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("duplicate gene id `{0}`")]
    DuplicateGene(String),
    #[error("duplicate sample id `{0}`")]
    DuplicateSample(String),
    #[error("label `{0}` is not in {{-1,+1}}")]
    InvalidLabel(String),
    #[error("labels contain a single class; both classes are required")]
    SingleClass,
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("self-loop on `{0}` is not allowed")]
    SelfLoop(String),
    #[error("edge endpoint `{0}` is not a network node")]
    UnknownNode(String),
    #[error("invalid group structure: {0}")]
    InvalidGroups(String),
    #[error("no covered genes: no network edge has both endpoints among the genes")]
    NoCoveredGenes,
    #[error("empty after connectivity filter")]
    EmptyAfterConnectivityFilter,
    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),
    #[error("missing gene id `{0}`")]
    MissingGene(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty signature")]
    EmptySignature,
    #[error("could not draw a two-class subsample after {0} attempts")]
    SubsampleRetries(usize),
    #[error("class of size {size} is smaller than the number of folds {k}")]
    ClassTooSmall { size: usize, k: usize },
    #[error("network required for method `{0}`")]
    NetworkRequired(String),
    #[error("planting failed: {0}")]
    Planting(String),
    #[error("fold {fold} failed: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
