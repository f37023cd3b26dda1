use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SearchSpaceError;

/// Candidate operation on a cell edge.
///
/// Vector-scale stand-ins for the NAS-Bench-201 operations: `None` zeroes
/// its input, `Skip` is the identity, `Lin` is a learned affine map,
/// `LinRelu` is a learned affine map followed by relu and `Avg` multiplies by
/// the fixed matrix `(1/width)·ones`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    None,
    Skip,
    Lin,
    LinRelu,
    Avg,
}

impl OpKind {
    pub const ALL: [OpKind; 5] = [OpKind::None, OpKind::Skip, OpKind::Lin, OpKind::LinRelu, OpKind::Avg];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::None => "none",
            OpKind::Skip => "skip",
            OpKind::Lin => "lin",
            OpKind::LinRelu => "lin_relu",
            OpKind::Avg => "avg",
        }
    }

    /// Whether the op owns trainable weights.
    pub fn is_parametric(self) -> bool {
        matches!(self, OpKind::Lin | OpKind::LinRelu)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = SearchSpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OpKind::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| SearchSpaceError::UnknownOp {
                name: s.to_string(),
                position: 0,
            })
    }
}

/// Ordered, duplicate-free list of candidate ops. The order is the column
/// order of the architecture parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpSet {
    ops: Vec<OpKind>,
}

impl OpSet {
    pub fn new(ops: Vec<OpKind>) -> Result<Self, SearchSpaceError> {
        if ops.is_empty() {
            return Err(SearchSpaceError::InvalidOpSet("operation set is empty".into()));
        }
        for (i, op) in ops.iter().enumerate() {
            if ops[..i].contains(op) {
                return Err(SearchSpaceError::InvalidOpSet(format!("duplicate op `{op}`")));
            }
        }
        Ok(Self { ops })
    }

    /// `[none, skip, lin, lin_relu, avg]`.
    pub fn canonical() -> Self {
        Self {
            ops: OpKind::ALL.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[OpKind] {
        &self.ops
    }

    pub fn get(&self, index: usize) -> Option<OpKind> {
        self.ops.get(index).copied()
    }

    pub fn position(&self, op: OpKind) -> Option<usize> {
        self.ops.iter().position(|&o| o == op)
    }

    pub fn position_by_name(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name() == name)
    }

    pub fn parametric_count(&self) -> usize {
        self.ops.iter().filter(|o| o.is_parametric()).count()
    }
}

impl Default for OpSet {
    fn default() -> Self {
        Self::canonical()
    }
}
