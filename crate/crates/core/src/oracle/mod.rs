//! Ground truth for search runs: a synthetic classification task the
//! supernet trains on, and a tabular benchmark that scores every genotype.

mod benchmark;
mod task;

pub use benchmark::{
    brute_force_best, brute_force_best_with, evaluate, generate_benchmark, generate_benchmark_with,
    rule_score, Provenance, TabularBenchmark,
};
pub use task::{Dataset, TaskParams};

use thiserror::Error;

use crate::searchspace::SearchSpaceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid task parameter `{field}`: {message}")]
    InvalidTask { field: String, message: String },
    #[error("genotype not in benchmark: {0}")]
    Missing(String),
    #[error("benchmark is incomplete: {} genotypes missing (first: {})", missing.len(), missing.first().map(String::as_str).unwrap_or(""))]
    Incomplete { missing: Vec<String> },
    #[error("benchmark is empty")]
    Empty,
    #[error("duplicate genotype in benchmark: {0}")]
    Duplicate(String),
    #[error("non-finite score {score} for {genotype}")]
    InvalidScore { genotype: String, score: f64 },
    #[error(transparent)]
    SearchSpace(#[from] SearchSpaceError),
}
