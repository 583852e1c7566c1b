//! Genuine three-particle nonlocality toolkit.
//!
//! Exact quantum predictions for three qubits, the Svetlichny inequality in
//! correlator and frustrated-network form, the hybrid local/two-particle
//! nonlocal model polytope, measurement-setting optimization and finite-shot
//! sampling.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod hidden_models;
pub mod inequalities;
pub mod lp;
pub mod optimizer;
pub mod quantum;
pub mod sampler;

pub use error::{Error, Result};
