use crate::diffcore::{softmax_slice, Tensor};

use super::{Genotype, SearchSpaceError, NUM_EDGES};

/// Architecture parameters: an unconstrained `[num_edges × num_ops]` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ArchParams {
    alpha: Tensor,
}

impl ArchParams {
    /// All-zero α, so every edge starts with a uniform β.
    pub fn zeros(num_edges: usize, num_ops: usize) -> Self {
        Self {
            alpha: Tensor::zeros(&[num_edges, num_ops]),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SearchSpaceError> {
        let num_ops = rows.first().map_or(0, Vec::len);
        if num_ops == 0 || rows.iter().any(|r| r.len() != num_ops) {
            return Err(SearchSpaceError::InvalidArch(
                "α rows must be non-empty and of equal length".into(),
            ));
        }
        let data = rows.iter().flatten().copied().collect();
        Ok(Self {
            alpha: Tensor::new(vec![rows.len(), num_ops], data)?,
        })
    }

    pub fn from_tensor(alpha: Tensor) -> Result<Self, SearchSpaceError> {
        if alpha.shape().len() != 2 || alpha.is_empty() {
            return Err(SearchSpaceError::InvalidArch(format!(
                "α must be a non-empty matrix, got shape {:?}",
                alpha.shape()
            )));
        }
        Ok(Self { alpha })
    }

    pub fn num_edges(&self) -> usize {
        self.alpha.shape()[0]
    }

    pub fn num_ops(&self) -> usize {
        self.alpha.shape()[1]
    }

    pub fn tensor(&self) -> &Tensor {
        &self.alpha
    }

    pub fn tensor_mut(&mut self) -> &mut Tensor {
        &mut self.alpha
    }

    pub fn row(&self, edge: usize) -> &[f64] {
        self.alpha.row(edge)
    }

    pub fn row_mut(&mut self, edge: usize) -> &mut [f64] {
        let k = self.num_ops();
        &mut self.alpha.data_mut()[edge * k..(edge + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.alpha.rows()
    }

    /// Row-wise stable softmax of α.
    pub fn beta(&self) -> Vec<Vec<f64>> {
        beta_of_alpha(self)
    }

    /// Per-edge argmax of α, ties to the lowest op index.
    pub fn argmax_rows(&self) -> Vec<usize> {
        self.rows().map(argmax).collect()
    }

    /// Discretize a cell's α into a genotype.
    pub fn discretize(&self) -> Result<Genotype, SearchSpaceError> {
        discretize(self)
    }
}

/// Row-wise stable softmax: β rows are positive and sum to one.
pub fn beta_of_alpha(arch: &ArchParams) -> Vec<Vec<f64>> {
    arch.rows().map(softmax_slice).collect()
}

/// Per-edge argmax of β (equivalently α); ties go to the lowest op index.
pub fn discretize(arch: &ArchParams) -> Result<Genotype, SearchSpaceError> {
    if arch.num_edges() != NUM_EDGES {
        return Err(SearchSpaceError::InvalidArch(format!(
            "a cell has {NUM_EDGES} edges, α has {} rows",
            arch.num_edges()
        )));
    }
    let mut ops = [0; NUM_EDGES];
    for (slot, row) in ops.iter_mut().zip(arch.rows()) {
        *slot = argmax(row);
    }
    Ok(Genotype::new(ops))
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_rows_give_uniform_beta() {
        let arch = ArchParams::zeros(6, 5);
        for row in arch.beta() {
            for b in row {
                assert!((b - 0.2).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ln3_row_gives_three_quarters() {
        let arch = ArchParams::from_rows(&[vec![3f64.ln(), 0.0]]).unwrap();
        let beta = arch.beta();
        assert!((beta[0][0] - 0.75).abs() < 1e-12);
        assert!((beta[0][1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn shift_invariance() {
        let a = ArchParams::from_rows(&[vec![0.3, -1.1, 2.0, 0.0, 0.7]]).unwrap();
        let b = ArchParams::from_rows(&[vec![7.3, 5.9, 9.0, 7.0, 7.7]]).unwrap();
        for (x, y) in a.beta()[0].iter().zip(&b.beta()[0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let arch = ArchParams::zeros(6, 5);
        assert_eq!(arch.discretize().unwrap(), Genotype::uniform(0));
        let arch = ArchParams::from_rows(&vec![vec![0.0, 1.0, 1.0, -2.0, 0.5]; 6]).unwrap();
        assert_eq!(arch.discretize().unwrap(), Genotype::uniform(1));
    }

    #[test]
    fn distinct_maxima_are_selected() {
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|e| (0..5).map(|k| if k == e % 5 { 1.0 } else { 0.0 }).collect())
            .collect();
        let g = ArchParams::from_rows(&rows).unwrap().discretize().unwrap();
        assert_eq!(g.ops(), &[0, 1, 2, 3, 4, 0]);
    }

    #[test]
    fn discretize_needs_six_edges() {
        assert!(ArchParams::zeros(3, 5).discretize().is_err());
    }
}
