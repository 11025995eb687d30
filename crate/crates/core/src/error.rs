use crate::complex::{ChainMap, Degree};
use crate::nerve::PosetSimplex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("differential does not square to zero in degree(s) {degrees:?}")]
    InvalidComplex { degrees: Vec<Degree> },

    #[error("not a chain map: {0}")]
    NotAChainMap(String),

    #[error("index {index} out of range for a simplex of length {length}")]
    IndexOutOfRange { index: usize, length: usize },

    #[error("vertices {0:?} are not strictly increasing")]
    NotIncreasing(Vec<usize>),

    #[error("no map stored for simplex {0}")]
    UnknownSimplex(PosetSimplex),

    #[error("obstruction at simplex {simplex}: the required homotopy does not exist")]
    Obstruction {
        simplex: PosetSimplex,
        /// The known part of the coherence relation; a hom-complex cycle
        /// that is not a boundary.
        witness: Box<ChainMap>,
    },

    #[error("interleaving obstruction: {relation} fails up to homotopy")]
    InterleaveObstruction {
        relation: String,
        /// The difference of the two sides; a cycle that is not a boundary.
        witness: Box<ChainMap>,
    },

    #[error("stage mismatch: {0}")]
    StageMismatch(String),

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
