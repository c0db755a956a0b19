use thiserror::Error;

use crate::tree::Vertex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tree degree must lie in 3..={max}, got {0}", max = crate::tree::MAX_DEGREE)]
    InvalidDegree(usize),

    #[error("letter {letter} is out of range for degree {k}")]
    InvalidLetter { letter: u8, k: usize },

    #[error("word {0:?} is not reduced")]
    NotReduced(String),

    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(Vertex, Vertex),

    #[error("inconsistent portrait: {0}")]
    InconsistentPortrait(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("automorphism does not fix {0}")]
    NotFixed(Vertex),

    #[error("displacement descent exceeded {0} steps")]
    BudgetExceeded(usize),

    #[error("automorphism is not hyperbolic")]
    NotHyperbolic,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
