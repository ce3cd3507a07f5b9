use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OkitError {
    #[error("not a finite Coxeter type supported here: {0}")]
    NonFiniteType(String),
    #[error("group order {order} exceeds the configured cap {cap}")]
    RankLimit { order: u64, cap: u64 },
    #[error("elements belong to different groups")]
    GroupMismatch,
    #[error("elements {x:?} and {y:?} are not Bruhat comparable")]
    NotComparable { x: String, y: String },
    #[error("element {0:?} is not the shortest representative of its coset")]
    NotShortestRep(String),
    #[error("element {0:?} is not in the index set of the block")]
    NotInIndexSet(String),
    #[error("the index set of the block is empty")]
    EmptyIndexSet,
    #[error("unsupported block flavor for this operation: {0}")]
    UnsupportedFlavor(String),
    #[error("invalid block specification: {0}")]
    InvalidBlockSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant breach: {0}")]
    InvariantBreach(String),
    #[error("order violation: {x:?} is not above {y:?}")]
    OrderViolation { x: String, y: String },
    #[error("profiles belong to different blocks: {0} vs {1}")]
    BlockMismatch(String, String),
    #[error("matrix is not invertible: {0}")]
    NonInvertible(String),
    #[error("character is in the {0} basis, expected {1}")]
    BasisMismatch(String, String),
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, OkitError>;
