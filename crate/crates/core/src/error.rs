use thiserror::Error;

/// Errors raised by the library. Variants map one-to-one onto the failure
/// modes each operation documents.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("arity {arity} exceeds the configured limit {limit}")]
    ArityTooLarge { arity: usize, limit: usize },
    #[error("not a measure: {0}")]
    NotAMeasure(String),
    #[error("missing intersection value for generator subset {0:?}")]
    MissingValue(Vec<usize>),
    #[error("restriction needs at least one kept generator")]
    EmptyKeptSet,
    #[error("invalid generator list: {0}")]
    InvalidGenerators(String),

    #[error("context {0:?} is not maximal")]
    NonMaximalContext(Vec<usize>),
    #[error("generator {0} does not appear in any context")]
    UncoveredGenerator(usize),
    #[error("state does not match the partial Boolean algebra: {0}")]
    StateShape(String),
    #[error("inconsistent state: {0}")]
    Inconsistent(String),
    #[error("node {0:?} is not contained in any context")]
    NodeNotInPba(Vec<usize>),
    #[error("property (K-S) does not hold; witness {0:?}")]
    KsPropertyRequired(Vec<usize>),

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("matrix {0} is not an orthogonal projection")]
    NotAProjection(String),
    #[error("invalid quantum state: {0}")]
    InvalidState(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("generator set does not generate context algebra {0}")]
    NotAGeneratingSet(usize),
    #[error("property (G) violated by context family {0:?}")]
    PropertyGViolated(Vec<usize>),
    #[error("state collection is not complete: {0}")]
    IncompleteStates(String),

    #[error("invalid three-observable data: {0}")]
    InvalidThreeSpec(String),
    #[error("(chi, eta) = ({chi}, {eta}) lies outside the admissible box")]
    ChiEtaOutOfBox { chi: String, eta: String },
    #[error("measures disagree on the overlap {0:?}")]
    OverlapMismatch(Vec<usize>),
    #[error("generator blocks overlap on {0:?}")]
    BlocksOverlap(Vec<usize>),
    #[error("compatibility graph has a cycle through nodes {0:?}")]
    NotAForest(Vec<usize>),
    #[error("no running-intersection order: {0}")]
    NoRunningIntersectionOrder(String),
    #[error("wrong compatibility topology: {0}")]
    WrongTopology(String),

    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("invalid correlation spec: {0}")]
    InvalidSpec(String),
    #[error("base vector is not in the correlation polytope")]
    InfeasibleBase,
    #[error("polytope is not full-dimensional (affine rank {rank}, dimension {dim})")]
    NotFullDimensional { rank: usize, dim: usize },

    #[error("value {value} outside the admissible band [{lower}, {upper}]")]
    ValueOutOfBand { value: String, lower: String, upper: String },
    #[error("not a partial measure: {0}")]
    NotPartialMeasure(String),
    #[error("function has no extension to a measure")]
    NotExtensible,
    #[error("invalid partial function: {0}")]
    InvalidPartialFunction(String),
}

pub type Result<T> = std::result::Result<T, Error>;
