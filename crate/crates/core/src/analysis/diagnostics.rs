use std::collections::BTreeMap;

use crate::searchspace::{ArchParams, OpKind, OpSet, CELL_EDGES};

use super::AnalysisError;

/// ‖β‖₂ per edge and their sum over edges.
#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzReport {
    pub per_edge: Vec<f64>,
    pub total: f64,
}

pub fn lipschitz_measure(arch: &ArchParams) -> LipschitzReport {
    let per_edge: Vec<f64> = arch
        .beta()
        .iter()
        .map(|row| row.iter().map(|b| b * b).sum::<f64>().sqrt())
        .collect();
    LipschitzReport {
        total: per_edge.iter().sum(),
        per_edge,
    }
}

/// β of the parametric ("conv") op and of `skip` on edges `(from, to)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeBetas {
    pub conv: BTreeMap<(usize, usize), f64>,
    pub skip: BTreeMap<(usize, usize), f64>,
}

impl EdgeBetas {
    /// Read `conv` and `skip` weights off a cell's β.
    pub fn from_arch(arch: &ArchParams, ops: &OpSet, conv: OpKind) -> Result<Self, AnalysisError> {
        let ci = ops
            .position(conv)
            .ok_or_else(|| AnalysisError::InvalidArgument(format!("op set has no `{conv}`")))?;
        let si = ops
            .position(OpKind::Skip)
            .ok_or_else(|| AnalysisError::InvalidArgument("op set has no `skip`".into()))?;
        let beta = arch.beta();
        let mut out = EdgeBetas::default();
        for (e, &edge) in CELL_EDGES.iter().enumerate().take(beta.len()) {
            out.conv.insert(edge, beta[e][ci]);
            out.skip.insert(edge, beta[e][si]);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceDiagnostic {
    pub h: usize,
    pub betas: EdgeBetas,
    pub phi: f64,
}

/// `φ = Σ_{i=0}^{h−2} β_conv(i, h−1)² · Π_{t<i} β_skip(t, i)²`.
pub fn phi_convergence(betas: &EdgeBetas, h: usize) -> Result<ConvergenceDiagnostic, AnalysisError> {
    if h < 2 {
        return Err(AnalysisError::InvalidArgument(format!("h must be at least 2, got {h}")));
    }
    let get = |map: &BTreeMap<(usize, usize), f64>, kind: &'static str, edge: (usize, usize)| {
        map.get(&edge).copied().ok_or(AnalysisError::MissingEdge {
            kind,
            from: edge.0,
            to: edge.1,
        })
    };
    let mut phi = 0.0;
    for i in 0..=h - 2 {
        let conv = get(&betas.conv, "conv", (i, h - 1))?;
        let mut prod = 1.0;
        for t in 0..i {
            let s = get(&betas.skip, "skip", (t, i))?;
            prod *= s * s;
        }
        phi += conv * conv * prod;
    }
    Ok(ConvergenceDiagnostic {
        h,
        betas: betas.clone(),
        phi,
    })
}
