//! Equilibrium engine for a three-level liability game between a lawmaker,
//! an AV manufacturer and human drivers in mixed AV/HV traffic.

// `!(x > 0)` style guards reject NaN together with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod error;
pub mod hierarchy;
pub mod model;
pub mod numeric;
pub mod scenarios;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases for the common case.
pub type Params = model::ModelParams<f64>;
pub type Solver = equilibrium::SolverConfig<f64>;
pub type Profile = model::CareProfile<f64>;
pub type Report = model::EquilibriumReport<f64>;
