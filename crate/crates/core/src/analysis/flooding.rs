use crate::regularizers::StepDirection;

use super::AnalysisError;

/// A twice-differentiable loss with an analytic gradient and Hessian-vector
/// product.
pub trait SmoothLoss {
    fn value(&self, w: &[f64]) -> f64;
    fn grad(&self, w: &[f64]) -> Vec<f64>;
    fn hvp(&self, w: &[f64], v: &[f64]) -> Vec<f64>;
}

/// `½‖w‖²`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Quadratic;

impl SmoothLoss for Quadratic {
    fn value(&self, w: &[f64]) -> f64 {
        0.5 * w.iter().map(|x| x * x).sum::<f64>()
    }

    fn grad(&self, w: &[f64]) -> Vec<f64> {
        w.to_vec()
    }

    fn hvp(&self, _w: &[f64], v: &[f64]) -> Vec<f64> {
        v.to_vec()
    }
}

/// `¼Σ w⁴`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Quartic;

impl SmoothLoss for Quartic {
    fn value(&self, w: &[f64]) -> f64 {
        0.25 * w.iter().map(|x| x.powi(4)).sum::<f64>()
    }

    fn grad(&self, w: &[f64]) -> Vec<f64> {
        w.iter().map(|x| x.powi(3)).collect()
    }

    fn hvp(&self, w: &[f64], v: &[f64]) -> Vec<f64> {
        w.iter().zip(v).map(|(x, y)| 3.0 * x * x * y).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FloodingTaylor {
    pub simulated: Vec<f64>,
    pub predicted: Vec<f64>,
    /// Max absolute difference between the two.
    pub error: f64,
}

/// Two flooded gradient steps from `w0` against the second-order prediction
/// `w0 − η²·H∇L` (that is, `w0 − (η²/2)∇‖∇L‖²`).
///
/// The first step must descend (`L(w0) > b`) and the second ascend
/// (`L(w1) < b`), otherwise the pair does not form a flooding round trip.
pub fn flooding_taylor_check<L: SmoothLoss + ?Sized>(
    loss: &L,
    w0: &[f64],
    eta: f64,
    b: f64,
) -> Result<FloodingTaylor, AnalysisError> {
    if !(eta > 0.0) {
        return Err(AnalysisError::InvalidArgument(format!("η must be positive, got {eta}")));
    }
    let step = |w: &[f64]| -> (Vec<f64>, StepDirection) {
        let sign = loss.value(w) - b;
        let dir = StepDirection::from_outer_derivative(sign);
        let s = match dir {
            StepDirection::Descent => 1.0,
            StepDirection::Ascent => -1.0,
            StepDirection::Flat => 0.0,
        };
        let g = loss.grad(w);
        (w.iter().zip(&g).map(|(x, gx)| x - eta * s * gx).collect(), dir)
    };
    let (w1, d1) = step(w0);
    let (w2, d2) = step(&w1);
    if d1 != StepDirection::Descent || d2 != StepDirection::Ascent {
        return Err(AnalysisError::NoAlternation {
            first: d1,
            second: d2,
        });
    }
    let g0 = loss.grad(w0);
    let hg = loss.hvp(w0, &g0);
    let predicted: Vec<f64> = w0.iter().zip(&hg).map(|(x, h)| x - eta * eta * h).collect();
    let error = w2.iter().zip(&predicted).map(|(a, p)| (a - p).abs()).fold(0.0, f64::max);
    Ok(FloodingTaylor {
        simulated: w2,
        predicted,
        error,
    })
}
