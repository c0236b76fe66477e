//! Exact analysis of non-preemptive stochastic scheduling on parallel
//! identical machines with two-point job sizes.
//!
//! - [`model`]: instances, exact rationals, realization enumeration.
//! - [`policy`]: priority rules and list scheduling of one realization.
//! - [`evaluator`]: exact expected costs of list policies, conditioning,
//!   paired per-realization tables, Monte-Carlo estimates.
//! - [`optimal`]: optimal non-idling adaptive policies by dynamic
//!   programming, threshold decisions and bisection.
//! - [`reduction`]: knapsack counting via scheduling-cost differences.
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod error;
pub mod evaluator;
pub mod model;
pub mod optimal;
pub mod policy;
pub mod reduction;

pub use error::{Error, Result};
