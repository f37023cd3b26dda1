use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diffcore::{DiffError, Graph, NodeId, Tensor};

use super::RegularizerError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightVariant {
    /// `μ‖w‖²` added to the training loss.
    L2,
    /// Same form as `L2` with a deliberately large coefficient `φ`.
    LargerL2,
    /// Uniform `[−ε, ε]` noise on α during the weight step.
    RandomSmoothing,
    /// `|L − b| + b` with flood level `b`.
    Flooding,
}

impl WeightVariant {
    pub fn name(self) -> &'static str {
        match self {
            WeightVariant::L2 => "l2",
            WeightVariant::LargerL2 => "larger_l2",
            WeightVariant::RandomSmoothing => "random_smoothing",
            WeightVariant::Flooding => "flooding",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightRegularizer {
    pub variant: WeightVariant,
    pub coefficient: f64,
}

impl WeightRegularizer {
    pub fn new(variant: WeightVariant, coefficient: f64) -> Result<Self, RegularizerError> {
        if !coefficient.is_finite() || coefficient < 0.0 {
            return Err(RegularizerError::InvalidCoefficient(format!(
                "{} coefficient must be finite and non-negative, got {coefficient}",
                variant.name()
            )));
        }
        Ok(Self { variant, coefficient })
    }

    pub fn l2(mu: f64) -> Result<Self, RegularizerError> {
        Self::new(WeightVariant::L2, mu)
    }

    pub fn flooding(level: f64) -> Result<Self, RegularizerError> {
        Self::new(WeightVariant::Flooding, level)
    }

    pub fn flood_level(&self) -> Option<f64> {
        (self.variant == WeightVariant::Flooding).then_some(self.coefficient)
    }
}

/// Direction a weight step moves along `∇L_train`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepDirection {
    Descent,
    Ascent,
    /// Zero gradient through the loss (flooding exactly at `b`).
    Flat,
}

impl StepDirection {
    /// From the derivative of the effective loss with respect to the raw loss.
    pub fn from_outer_derivative(d: f64) -> Self {
        if d > 0.0 {
            StepDirection::Descent
        } else if d < 0.0 {
            StepDirection::Ascent
        } else {
            StepDirection::Flat
        }
    }
}

/// Effective training loss node for the weight step.
///
/// `l2`/`larger_l2` add `c·Σ‖w‖²`; `flooding` returns `|L − b| + b`;
/// `random_smoothing` leaves the loss unchanged (see [`smoothing_perturbation`]).
pub fn apply_weight_regularizer(
    g: &mut Graph,
    train_loss: NodeId,
    reg: &WeightRegularizer,
    weights: &[NodeId],
) -> Result<NodeId, DiffError> {
    match reg.variant {
        WeightVariant::L2 | WeightVariant::LargerL2 => {
            if reg.coefficient == 0.0 || weights.is_empty() {
                return Ok(train_loss);
            }
            let mut total = g.sq_norm(weights[0]);
            for &w in &weights[1..] {
                let s = g.sq_norm(w);
                total = g.add(total, s)?;
            }
            g.scale_add(1.0, train_loss, reg.coefficient, total)
        }
        WeightVariant::RandomSmoothing => Ok(train_loss),
        WeightVariant::Flooding => {
            let b = reg.coefficient;
            let shifted = g.add_scalar(train_loss, -b);
            let magnitude = g.abs(shifted);
            Ok(g.add_scalar(magnitude, b))
        }
    }
}

/// One draw of `δ ~ Uniform[−ε, ε]` per α entry, or `None` when the
/// regularizer is not random smoothing or `ε = 0`.
pub fn smoothing_perturbation<R: Rng + ?Sized>(
    reg: &WeightRegularizer,
    alpha_shape: &[usize],
    rng: &mut R,
) -> Option<Tensor> {
    if reg.variant != WeightVariant::RandomSmoothing || reg.coefficient == 0.0 {
        return None;
    }
    let eps = reg.coefficient;
    let mut delta = Tensor::zeros(alpha_shape);
    for v in delta.data_mut() {
        *v = rng.random_range(-eps..=eps);
    }
    Some(delta)
}
