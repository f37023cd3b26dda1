//! The alternating bi-level search: α steps on one data partition, weight
//! steps on the other, with proxy knobs and α-std early stopping.

mod config;
mod early_stop;
mod partition;
mod search;

pub use config::{seed_from_env, Criterion, EarlyStopConfig, ProxyConfig, SearchConfig, SEED_ENV};
pub use early_stop::{update_early_stop, CriteriaTracker, EarlyStopState, FiredEpochs};
pub use partition::{partition_data, Partition};
pub use search::{
    run, search, supernet_spec, sweep, RunFingerprint, SearchOutcome, SearchTrajectory, StepLog,
    TrajectoryRecord,
};

use thiserror::Error;

use crate::diffcore::DiffError;
use crate::oracle::OracleError;
use crate::regularizers::RegularizerError;
use crate::searchspace::SearchSpaceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BilevelError {
    #[error("invalid `{field}`: {message}")]
    InvalidConfig { field: String, message: String },
    #[error(
        "data partition is empty ({samples} samples after reduction); {}",
        match min_fraction {
            Some(f) => format!("use proxy.data_fraction ≥ {f}"),
            None => "the dataset is too small to split".to_string(),
        }
    )]
    EmptyPartition { samples: usize, min_fraction: Option<f64> },
    #[error("α became non-finite at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    SearchSpace(#[from] SearchSpaceError),
    #[error(transparent)]
    Regularizer(#[from] RegularizerError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
