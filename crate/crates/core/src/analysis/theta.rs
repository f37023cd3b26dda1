use crate::diffcore::{logsumexp_slice, softmax_slice, Tensor};
use crate::regularizers::{alpha_penalty_step, penalty_direction, AlphaVariant};
use crate::searchspace::ArchParams;

use super::AnalysisError;

/// θ values of one regularized α step and how far the closed form is from
/// direct simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaReport {
    pub theta: Vec<f64>,
    pub variant: AlphaVariant,
    pub lambda_eta: f64,
    /// Max relative deviation between closed form and simulation.
    pub max_deviation: f64,
}

fn check_inputs(alpha: &[f64], lambda: f64, eta: f64, data_grad: &[f64]) -> Result<(), AnalysisError> {
    if alpha.is_empty() {
        return Err(AnalysisError::InvalidArgument("α row is empty".into()));
    }
    if data_grad.len() != alpha.len() {
        return Err(AnalysisError::InvalidArgument(format!(
            "gradient has {} entries, α row has {}",
            data_grad.len(),
            alpha.len()
        )));
    }
    if !(lambda >= 0.0 && eta >= 0.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "λ and η must be non-negative, got λ={lambda}, η={eta}"
        )));
    }
    Ok(())
}

fn row_arch(alpha: &[f64]) -> ArchParams {
    ArchParams::from_rows(&[alpha.to_vec()]).expect("non-empty row")
}

/// `θ_k = Σ_j exp(a'_j) / Σ_j exp(a'_j + λη(F_k − F_j))`, where
/// `a' = α − η·∇` is the unregularized update and `F` the variant's penalty
/// direction at `α`.
pub fn theta_closed_form(
    alpha: &[f64],
    variant: AlphaVariant,
    lambda: f64,
    eta: f64,
    data_grad: &[f64],
) -> Result<Vec<f64>, AnalysisError> {
    check_inputs(alpha, lambda, eta, data_grad)?;
    let f = penalty_direction(&row_arch(alpha), variant).into_data();
    let next: Vec<f64> = alpha.iter().zip(data_grad).map(|(a, g)| a - eta * g).collect();
    let c = lambda * eta;
    let lse_next = logsumexp_slice(&next);
    let theta = f
        .iter()
        .map(|&fk| {
            let shifted: Vec<f64> = next.iter().zip(&f).map(|(a, fj)| a + c * (fk - fj)).collect();
            (lse_next - logsumexp_slice(&shifted)).exp()
        })
        .collect();
    Ok(theta)
}

/// `softmax(ᾱ) / softmax(a')` from running the regularized and the plain
/// update side by side.
pub fn theta_simulated(
    alpha: &[f64],
    variant: AlphaVariant,
    lambda: f64,
    eta: f64,
    data_grad: &[f64],
) -> Result<Vec<f64>, AnalysisError> {
    check_inputs(alpha, lambda, eta, data_grad)?;
    let arch = row_arch(alpha);
    let grad = Tensor::matrix(1, alpha.len(), data_grad.to_vec()).expect("row shape");
    let plain = alpha_penalty_step(&arch, variant, 0.0, eta, &grad)?;
    let regular = alpha_penalty_step(&arch, variant, lambda, eta, &grad)?;
    let b_plain = softmax_slice(plain.row(0));
    let b_reg = softmax_slice(regular.row(0));
    Ok(b_reg.iter().zip(&b_plain).map(|(r, p)| r / p).collect())
}

pub fn theta_report(
    alpha: &[f64],
    variant: AlphaVariant,
    lambda: f64,
    eta: f64,
    data_grad: &[f64],
) -> Result<ThetaReport, AnalysisError> {
    let closed = theta_closed_form(alpha, variant, lambda, eta, data_grad)?;
    let sim = theta_simulated(alpha, variant, lambda, eta, data_grad)?;
    let max_deviation = closed
        .iter()
        .zip(&sim)
        .map(|(c, s)| (c - s).abs() / s.abs())
        .fold(0.0, f64::max);
    Ok(ThetaReport {
        theta: closed,
        variant,
        lambda_eta: lambda * eta,
        max_deviation,
    })
}
