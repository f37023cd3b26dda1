//! Numeric checks of the closed-form derivations (θ ratios, the flooding
//! Taylor identity) and the diagnostics built on β (‖β‖₂, φ, α statistics).

mod diagnostics;
mod flooding;
mod stats;
mod theta;
pub mod verify;

pub use diagnostics::{lipschitz_measure, phi_convergence, ConvergenceDiagnostic, EdgeBetas, LipschitzReport};
pub use flooding::{flooding_taylor_check, FloodingTaylor, Quadratic, Quartic, SmoothLoss};
pub use stats::{alpha_stats, edge_stats, total_beta_std, EdgeStats};
pub use theta::{theta_closed_form, theta_report, theta_simulated, ThetaReport};

use thiserror::Error;

use crate::regularizers::{RegularizerError, StepDirection};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("missing β_{kind} for edge ({from}, {to})")]
    MissingEdge { kind: &'static str, from: usize, to: usize },
    #[error("flooding steps did not descend then ascend (got {first:?} then {second:?})")]
    NoAlternation { first: StepDirection, second: StepDirection },
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error(transparent)]
    Regularizer(#[from] RegularizerError),
}
