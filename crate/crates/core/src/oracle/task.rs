use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diffcore::Tensor;

use super::OracleError;

/// Parameters of the synthetic classification task.
///
/// Class `c` is Gaussian around `separation · (c − (C−1)/2) · d` with
/// isotropic standard deviation `noise`, where `d` is a unit direction mixing
/// a planted alternating-sign axis (orthogonal to the all-ones vector) with a
/// small all-ones component of weight `shortcut`. Mean pooling only sees the
/// all-ones component, so recovering the planted axis needs a learned map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskParams {
    pub seed: u64,
    pub n: usize,
    pub input_dim: usize,
    pub num_classes: usize,
    pub noise: f64,
    pub separation: f64,
    pub shortcut: f64,
}

impl Default for TaskParams {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 1000,
            input_dim: 8,
            num_classes: 2,
            noise: 1.0,
            separation: 4.0,
            shortcut: 0.1,
        }
    }
}

/// Features `[n × input_dim]` with integer labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Tensor,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.features.last_dim()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> (Tensor, Vec<usize>) {
        let d = self.input_dim();
        let mut data = Vec::with_capacity(indices.len() * d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            data.extend_from_slice(self.features.row(i));
            labels.push(self.labels[i]);
        }
        (Tensor::new(vec![indices.len(), d], data).expect("row shape"), labels)
    }
}

impl TaskParams {
    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |field: &str, m: String| {
            Err(OracleError::InvalidTask {
                field: field.to_string(),
                message: m,
            })
        };
        if self.n == 0 {
            return bad("n", "need at least one sample".into());
        }
        if self.input_dim < 2 {
            return bad("input_dim", format!("must be at least 2, got {}", self.input_dim));
        }
        if self.num_classes < 2 {
            return bad("num_classes", format!("must be at least 2, got {}", self.num_classes));
        }
        if !(self.noise.is_finite() && self.noise > 0.0) {
            return bad("noise", format!("must be positive, got {}", self.noise));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0) {
            return bad("separation", format!("must be non-negative, got {}", self.separation));
        }
        if !(0.0..=1.0).contains(&self.shortcut) {
            return bad("shortcut", format!("must be in [0, 1], got {}", self.shortcut));
        }
        Ok(())
    }

    /// Unit direction along which the class means are spaced.
    pub fn class_direction(&self) -> Vec<f64> {
        let d = self.input_dim;
        // Alternating signs over an even prefix: sums to zero.
        let even = d - d % 2;
        let planted: Vec<f64> = (0..d)
            .map(|j| {
                if j >= even {
                    0.0
                } else if j % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        let pn = (even as f64).sqrt();
        let on = (d as f64).sqrt();
        let (c, s) = ((1.0 - self.shortcut * self.shortcut).sqrt(), self.shortcut);
        planted.iter().map(|&p| c * p / pn + s / on).collect()
    }

    pub fn class_mean(&self, class: usize) -> Vec<f64> {
        let offset = class as f64 - (self.num_classes as f64 - 1.0) / 2.0;
        self.class_direction()
            .into_iter()
            .map(|v| self.separation * offset * v)
            .collect()
    }

    /// Deterministic draw; labels cycle through the classes.
    pub fn generate(&self) -> Result<Dataset, OracleError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let means: Vec<Vec<f64>> = (0..self.num_classes).map(|c| self.class_mean(c)).collect();
        let mut data = Vec::with_capacity(self.n * self.input_dim);
        let mut labels = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let label = i % self.num_classes;
            for &m in &means[label] {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(m + self.noise * z);
            }
            labels.push(label);
        }
        Ok(Dataset {
            features: Tensor::new(vec![self.n, self.input_dim], data).expect("task shape"),
            labels,
            num_classes: self.num_classes,
        })
    }
}
