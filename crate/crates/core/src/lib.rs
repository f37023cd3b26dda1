//! Differentiable architecture search on a NAS-Bench-201 style cell with
//! Beta-Decay regularization on architecture parameters and flooding on
//! network weights.
//!
//! The crate is organized bottom-up:
//!
//! - [`diffcore`]: tape-based reverse-mode autodiff over dense `f64` tensors.
//! - [`searchspace`]: operation set, architecture parameters, the supernet
//!   and genotype encoding.
//! - [`regularizers`]: architecture and weight regularizers and λ schedules.
//! - [`bilevel`]: the alternating search loop, data partitioning and the
//!   α-std early-stop criteria.
//! - [`oracle`]: synthetic training task and a tabular benchmark with a
//!   brute-force enumerator.
//! - [`analysis`]: numeric checks of the closed-form derivations and the
//!   diagnostics built on them.
//! - [`io`]: CSV formats for benchmarks and trajectories.
//! - [`par`]: data-parallel helpers with a sequential fallback.

pub mod analysis;
pub mod bilevel;
pub mod diffcore;
pub mod io;
pub mod oracle;
pub mod par;
pub mod regularizers;
pub mod searchspace;
