use serde::{Deserialize, Serialize};

use crate::diffcore::{sigmoid, softmax_slice, DiffError, Graph, NodeId, Tensor};
use crate::searchspace::ArchParams;

use super::{LambdaSchedule, RegularizerError};

/// Which regularizer acts on the architecture parameters.
///
/// The `beta_*` variants add a differentiable term to the α objective. The
/// `l2_adam_emulated` and `weight_decay` variants act directly on the update
/// rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaVariant {
    None,
    L2AdamEmulated,
    WeightDecay,
    BetaDecay,
    BetaGlobal,
    BetaZero,
}

impl AlphaVariant {
    pub fn is_loss_term(self) -> bool {
        matches!(self, AlphaVariant::BetaDecay | AlphaVariant::BetaGlobal | AlphaVariant::BetaZero)
    }

    pub fn name(self) -> &'static str {
        match self {
            AlphaVariant::None => "none",
            AlphaVariant::L2AdamEmulated => "l2_adam_emulated",
            AlphaVariant::WeightDecay => "weight_decay",
            AlphaVariant::BetaDecay => "beta_decay",
            AlphaVariant::BetaGlobal => "beta_global",
            AlphaVariant::BetaZero => "beta_zero",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaRegularizer {
    pub variant: AlphaVariant,
    pub schedule: LambdaSchedule,
}

impl AlphaRegularizer {
    pub fn none(epochs: usize) -> Self {
        Self {
            variant: AlphaVariant::None,
            schedule: LambdaSchedule::off(epochs),
        }
    }

    /// λ used at a 0-based search epoch (the schedule is 1-based).
    pub fn lambda_at(&self, epoch: usize) -> f64 {
        if self.variant == AlphaVariant::None {
            0.0
        } else {
            self.schedule.value(epoch + 1)
        }
    }
}

/// Mean over edges of `logsumexp(α_row)`; its gradient is `softmax(α)/edges`.
pub fn beta_decay_loss(g: &mut Graph, alpha: NodeId) -> Result<NodeId, DiffError> {
    let per_edge = g.logsumexp(alpha)?;
    Ok(g.mean(per_edge))
}

/// `logsumexp` over every α entry of the supernet jointly.
pub fn beta_global_loss(g: &mut Graph, alpha: NodeId) -> Result<NodeId, DiffError> {
    // ln Σ_l exp(ln Σ_k exp α_lk) is the joint logsumexp.
    let per_edge = g.logsumexp(alpha)?;
    g.logsumexp(per_edge)
}

/// `Σ softplus(α)` averaged over edges: the smooth maximum of 0 and each entry.
pub fn beta_zero_loss(g: &mut Graph, alpha: NodeId) -> Result<NodeId, DiffError> {
    let edges = g.value(alpha).outer_len().max(1) as f64;
    let sp = g.softplus(alpha);
    let total = g.sum(sp);
    Ok(g.scale(1.0 / edges, total))
}

/// The loss term of a `beta_*` variant, or `None` for update-rule variants.
pub fn alpha_loss(g: &mut Graph, alpha: NodeId, variant: AlphaVariant) -> Result<Option<NodeId>, DiffError> {
    Ok(match variant {
        AlphaVariant::BetaDecay => Some(beta_decay_loss(g, alpha)?),
        AlphaVariant::BetaGlobal => Some(beta_global_loss(g, alpha)?),
        AlphaVariant::BetaZero => Some(beta_zero_loss(g, alpha)?),
        _ => None,
    })
}

/// Value of a `beta_*` loss at `arch`; `None` for other variants.
pub fn alpha_loss_value(arch: &ArchParams, variant: AlphaVariant) -> Option<f64> {
    let mut g = Graph::new();
    let a = g.constant(arch.tensor().clone());
    alpha_loss(&mut g, a, variant)
        .expect("α is a non-empty matrix")
        .map(|id| g.value(id).item())
}

/// `α / (Σ|α| + 1e-12)`: the magnitude-normalized L2 direction.
pub fn normalize_by_magnitude(row: &[f64]) -> Vec<f64> {
    let total: f64 = row.iter().map(|v| v.abs()).sum::<f64>() + 1e-12;
    row.iter().map(|v| v / total).collect()
}

/// Penalty direction `F(α)` of the unified update `ᾱ = α − η∇L − ηλF(α)`.
pub fn penalty_direction(arch: &ArchParams, variant: AlphaVariant) -> Tensor {
    let shape = arch.tensor().shape().to_vec();
    let data: Vec<f64> = match variant {
        AlphaVariant::None => vec![0.0; arch.tensor().len()],
        AlphaVariant::L2AdamEmulated => arch.rows().flat_map(normalize_by_magnitude).collect(),
        AlphaVariant::WeightDecay => arch.tensor().data().to_vec(),
        AlphaVariant::BetaDecay => arch.rows().flat_map(softmax_slice).collect(),
        AlphaVariant::BetaGlobal => softmax_slice(arch.tensor().data()),
        AlphaVariant::BetaZero => arch.tensor().data().iter().map(|&v| sigmoid(v)).collect(),
    };
    Tensor::new(shape, data).expect("same shape as α")
}

/// One explicit step `ᾱ = α − η·data_grad − ηλ·F(α)`.
pub fn alpha_penalty_step(
    arch: &ArchParams,
    variant: AlphaVariant,
    lambda: f64,
    eta: f64,
    data_grad: &Tensor,
) -> Result<ArchParams, RegularizerError> {
    if !(lambda >= 0.0) || !(eta >= 0.0) {
        return Err(RegularizerError::InvalidCoefficient(format!(
            "λ and η must be non-negative, got λ={lambda}, η={eta}"
        )));
    }
    if data_grad.shape() != arch.tensor().shape() {
        return Err(RegularizerError::Diff(DiffError::ShapeMismatch {
            op: "alpha_penalty_step",
            left: arch.tensor().shape().to_vec(),
            right: data_grad.shape().to_vec(),
        }));
    }
    let f = penalty_direction(arch, variant);
    let mut next = arch.clone();
    for ((a, g), fv) in next
        .tensor_mut()
        .data_mut()
        .iter_mut()
        .zip(data_grad.data())
        .zip(f.data())
    {
        *a = *a - eta * g - eta * lambda * fv;
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::finite_diff_check;

    fn arch(rows: &[Vec<f64>]) -> ArchParams {
        ArchParams::from_rows(rows).unwrap()
    }

    #[test]
    fn beta_decay_values() {
        let v = alpha_loss_value(&arch(&[vec![0.0, 0.0]]), AlphaVariant::BetaDecay).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let v = alpha_loss_value(&ArchParams::zeros(6, 5), AlphaVariant::BetaDecay).unwrap();
        assert!((v - 1.609438).abs() < 1e-6);
    }

    #[test]
    fn beta_decay_gradient_single_edge() {
        let mut g = Graph::new();
        let a = g.alpha(arch(&[vec![3f64.ln(), 0.0]]).tensor().clone());
        let l = beta_decay_loss(&mut g, a).unwrap();
        let d = g.backward(l).unwrap().wrt(a);
        assert!((d.data()[0] - 0.75).abs() < 1e-12);
        assert!((d.data()[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn beta_global_values() {
        let v = alpha_loss_value(&ArchParams::zeros(6, 5), AlphaVariant::BetaGlobal).unwrap();
        assert!((v - 30f64.ln()).abs() < 1e-12);
        assert!((v - 3.401197).abs() < 1e-6);
        let mut a = ArchParams::zeros(6, 5);
        a.row_mut(2)[3] = 1e3;
        let v = alpha_loss_value(&a, AlphaVariant::BetaGlobal).unwrap();
        assert!((v - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn beta_global_gradient_is_global_softmax() {
        let point = Tensor::matrix(6, 5, (0..30).map(|i| ((i * 5 % 7) as f64 - 3.0) / 2.0).collect()).unwrap();
        let err = finite_diff_check(beta_global_loss, &point, 1e-5).unwrap();
        assert!(err < 1e-6, "{err}");

        let mut g = Graph::new();
        let a = g.alpha(point.clone());
        let l = beta_global_loss(&mut g, a).unwrap();
        let d = g.backward(l).unwrap().wrt(a);
        let expected = softmax_slice(point.data());
        for (x, y) in d.data().iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_zero_values_and_gradient() {
        let a = arch(&[vec![0.0]]);
        let v = alpha_loss_value(&a, AlphaVariant::BetaZero).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        let a = arch(&[vec![-40.0]]);
        let v = alpha_loss_value(&a, AlphaVariant::BetaZero).unwrap();
        assert!(v > 0.0 && v < 1e-17);

        let point = Tensor::matrix(2, 3, vec![-2.0, 0.5, 1.5, 0.0, -0.3, 3.0]).unwrap();
        let err = finite_diff_check(beta_zero_loss, &point, 1e-5).unwrap();
        assert!(err < 1e-6, "{err}");
        let mut g = Graph::new();
        let a = g.alpha(point.clone());
        let l = beta_zero_loss(&mut g, a).unwrap();
        let d = g.backward(l).unwrap().wrt(a);
        for (x, v) in d.data().iter().zip(point.data()) {
            assert!((x - sigmoid(*v) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn penalty_step_examples() {
        let a = arch(&[vec![1.0, 0.0]]);
        let zero = Tensor::zeros(&[1, 2]);
        let next = alpha_penalty_step(&a, AlphaVariant::BetaDecay, 1.0, 0.1, &zero).unwrap();
        assert!((next.row(0)[0] - 0.926894).abs() < 1e-6);
        assert!((next.row(0)[1] + 0.026894).abs() < 1e-6);

        let next = alpha_penalty_step(&a, AlphaVariant::WeightDecay, 1.0, 0.1, &zero).unwrap();
        assert!((next.row(0)[0] - 0.9).abs() < 1e-15);
        assert_eq!(next.row(0)[1], 0.0);
    }

    #[test]
    fn zero_lambda_is_plain_step() {
        let a = arch(&[vec![0.3, -0.7, 1.1]]);
        let grad = Tensor::matrix(1, 3, vec![0.5, -1.0, 0.25]).unwrap();
        for variant in [
            AlphaVariant::None,
            AlphaVariant::L2AdamEmulated,
            AlphaVariant::WeightDecay,
            AlphaVariant::BetaDecay,
        ] {
            let next = alpha_penalty_step(&a, variant, 0.0, 0.2, &grad).unwrap();
            assert_eq!(next.row(0), &[0.3 - 0.1, -0.7 + 0.2, 1.1 - 0.05]);
        }
    }

    #[test]
    fn l2_direction_is_magnitude_normalized() {
        let n = normalize_by_magnitude(&[2.0, -1.0, 1.0]);
        assert!((n[0] - 0.5).abs() < 1e-12);
        assert!((n[1] + 0.25).abs() < 1e-12);
        assert_eq!(normalize_by_magnitude(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_negative_coefficients() {
        let a = arch(&[vec![0.0, 1.0]]);
        let z = Tensor::zeros(&[1, 2]);
        assert!(alpha_penalty_step(&a, AlphaVariant::BetaDecay, -1.0, 0.1, &z).is_err());
        assert!(alpha_penalty_step(&a, AlphaVariant::BetaDecay, 1.0, -0.1, &z).is_err());
    }
}
