use crate::searchspace::ArchParams;

use super::AnalysisError;

/// Order statistics of one α row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeStats {
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
}

pub fn edge_stats(row: &[f64]) -> EdgeStats {
    assert!(!row.is_empty(), "empty α row");
    let n = row.len() as f64;
    let mean = row.iter().sum::<f64>() / n;
    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mut sorted = row.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    EdgeStats {
        mean,
        median,
        std: var.sqrt(),
    }
}

/// Per-snapshot, per-edge statistics of a sequence of α values.
pub fn alpha_stats(history: &[ArchParams]) -> Result<Vec<Vec<EdgeStats>>, AnalysisError> {
    if history.is_empty() {
        return Err(AnalysisError::Empty("α history"));
    }
    Ok(history.iter().map(|a| a.rows().map(edge_stats).collect()).collect())
}

/// Sum over edges of the std of β: the total spread under edge independence.
pub fn total_beta_std(arch: &ArchParams) -> f64 {
    arch.beta().iter().map(|row| edge_stats(row).std).sum()
}
