use super::{DiffError, Graph, LeafKind, NodeId, Tensor};

/// Compare reverse-mode gradients of a scalar function against central
/// differences.
///
/// `build` records the function on a fresh graph given the parameter leaf and
/// returns the scalar output node. Returns
/// `max_i |g_ad[i] - g_fd[i]| / max(1, |g_fd[i]|)`.
pub fn finite_diff_check<F>(build: F, point: &Tensor, h: f64) -> Result<f64, DiffError>
where
    F: Fn(&mut Graph, NodeId) -> Result<NodeId, DiffError>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(DiffError::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let mut graph = Graph::new();
    let leaf = graph.leaf(point.clone(), LeafKind::Weight);
    let out = build(&mut graph, leaf)?;
    let value = graph.value(out).item();
    if !value.is_finite() {
        return Err(DiffError::NonFinite { context: "finite_diff_check at point" });
    }
    let analytic = graph.backward(out)?.wrt(leaf);

    let eval = |p: Tensor| -> Result<f64, DiffError> {
        let mut g = Graph::new();
        let leaf = g.leaf(p, LeafKind::Constant);
        let out = build(&mut g, leaf)?;
        let v = g.value(out).item();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DiffError::NonFinite { context: "finite_diff_check at perturbed point" })
        }
    };

    let mut worst: f64 = 0.0;
    for i in 0..point.len() {
        let mut plus = point.clone();
        plus.data_mut()[i] += h;
        let mut minus = point.clone();
        minus.data_mut()[i] -= h;
        let fd = (eval(plus)? - eval(minus)?) / (2.0 * h);
        let err = (analytic.data()[i] - fd).abs() / fd.abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}
