//! Regularizers for architecture parameters (α) and supernet weights (w),
//! and the λ schedules that drive them.

mod alpha;
mod schedule;
mod weight;

pub use alpha::{
    alpha_loss, alpha_loss_value, alpha_penalty_step, beta_decay_loss, beta_global_loss,
    beta_zero_loss, normalize_by_magnitude, penalty_direction, AlphaRegularizer, AlphaVariant,
};
pub use schedule::{LambdaSchedule, ScheduleKind};
pub use weight::{
    apply_weight_regularizer, smoothing_perturbation, StepDirection, WeightRegularizer,
    WeightVariant,
};

use thiserror::Error;

use crate::diffcore::DiffError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegularizerError {
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("invalid λ schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),
}
