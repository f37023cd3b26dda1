use serde::{Deserialize, Serialize};

use super::RegularizerError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    LinearIncrease,
    LinearDecay,
}

/// Regularization coefficient as an affine function of the epoch:
/// `λ(0) = start`, `λ(E) = end`, clamped past `E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaSchedule {
    kind: ScheduleKind,
    start: f64,
    end: f64,
    epochs: usize,
}

impl LambdaSchedule {
    pub fn new(kind: ScheduleKind, start: f64, end: f64, epochs: usize) -> Result<Self, RegularizerError> {
        let bad = |m: String| Err(RegularizerError::InvalidSchedule(m));
        if !start.is_finite() || !end.is_finite() || start < 0.0 || end < 0.0 {
            return bad(format!("λ endpoints must be finite and non-negative, got {start} → {end}"));
        }
        if epochs == 0 {
            return bad("schedule needs at least one epoch".into());
        }
        match kind {
            ScheduleKind::Constant if start != end => {
                bad(format!("a constant schedule needs start == end, got {start} and {end}"))
            }
            ScheduleKind::LinearIncrease if end < start => {
                bad(format!("linear_increase needs end ≥ start, got {start} → {end}"))
            }
            ScheduleKind::LinearDecay if end > start => {
                bad(format!("linear_decay needs end ≤ start, got {start} → {end}"))
            }
            _ => Ok(Self {
                kind,
                start,
                end,
                epochs,
            }),
        }
    }

    pub fn constant(value: f64, epochs: usize) -> Result<Self, RegularizerError> {
        Self::new(ScheduleKind::Constant, value, value, epochs)
    }

    /// `λ ≡ 0`.
    pub fn off(epochs: usize) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            start: 0.0,
            end: 0.0,
            epochs: epochs.max(1),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn is_zero(&self) -> bool {
        self.start == 0.0 && self.end == 0.0
    }

    pub fn value(&self, epoch: usize) -> f64 {
        let t = epoch.min(self.epochs) as f64 / self.epochs as f64;
        self.start + (self.end - self.start) * t
    }
}
