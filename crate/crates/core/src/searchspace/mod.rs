//! The cell search space: a 4-node DAG with 6 edges, each edge a softmax
//! mixture over the candidate op set.

mod arch;
mod genotype;
mod ops;
mod supernet;

pub use arch::{beta_of_alpha, discretize, ArchParams};
pub use genotype::{genotype_to_string, string_to_genotype, Genotype};
pub use ops::{OpKind, OpSet};
pub use supernet::{
    mixed_edge_forward, supernet_forward, BoundWeights, ShapeFingerprint, Supernet, SupernetSpec,
    MAX_DEPTH, MAX_WIDTH,
};

use thiserror::Error;

use crate::diffcore::DiffError;

pub const NUM_NODES: usize = 4;
pub const NUM_EDGES: usize = 6;

/// `(source, target)` for every edge, in genotype order.
pub const CELL_EDGES: [(usize, usize); NUM_EDGES] = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchSpaceError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("feature width mismatch: supernet width is {expected}, input has {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("input batch must be [n, {expected}], got {found:?}")]
    InputMismatch { expected: usize, found: Vec<usize> },
    #[error("invalid operation set: {0}")]
    InvalidOpSet(String),
    #[error("invalid architecture parameters: {0}")]
    InvalidArch(String),
    #[error("invalid supernet spec: {0}")]
    InvalidSpec(String),
    #[error("edge {edge}: op index {index} out of range for {num_ops} ops")]
    OpIndexOutOfRange { edge: usize, index: usize, num_ops: usize },
    #[error("unknown op `{name}` at position {position}")]
    UnknownOp { name: String, position: usize },
    #[error("malformed genotype at position {position}: {message}")]
    Parse { position: usize, message: String },
}
