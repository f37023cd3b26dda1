//! Minimal dense reverse-mode automatic differentiation.
//!
//! A [`Graph`] is a tape: every primitive appends a node holding its output
//! value, and [`Graph::backward`] walks the tape once in reverse. Graphs are
//! cheap to build and are rebuilt for every optimization step.
//!
//! Shapes are static and there is no broadcasting beyond constant
//! scalar-times-tensor. Softmax and logsumexp act on the last axis.

mod check;
mod graph;
mod tensor;

pub use check::finite_diff_check;
pub use graph::{Gradients, Graph, LeafKind, NodeId};
pub use tensor::{logsumexp_slice, sigmoid, softmax_slice, softplus, Tensor};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("{op}: shape mismatch between {left:?} and {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("{op}: unsupported input shape {shape:?}")]
    UnsupportedShape { op: &'static str, shape: Vec<usize> },
    #[error("shape {shape:?} does not hold {len} values")]
    InvalidShape { shape: Vec<usize>, len: usize },
    #[error("backward needs a scalar loss, got shape {shape:?}")]
    NonScalarLoss { shape: Vec<usize> },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("{0}")]
    InvalidArgument(String),
}
