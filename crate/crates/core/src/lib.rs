//! Stochastic strongly convex minimization by aggregating quadratic
//! prox-functions, together with the baselines it is measured against,
//! closed-form rate and tail-bound calculators, and a Monte Carlo harness.
//!
//! Module map:
//!
//! - [`vecdom`]: dense points and convex domains with exact projection.
//! - [`oracles`]: stochastic first-order oracles and synthetic problems.
//! - [`proxmodel`]: closed-form aggregated prox model.
//! - [`solvers`]: the aggregation method plus SGD, Epoch-GD and ERM.
//! - [`bounds`]: rates, high-probability bounds, sandwich utilities.
//! - [`harness`]: experiment config, Monte Carlo runs, CSV output, CLI.

pub mod bounds;
pub mod error;
pub mod harness;
pub mod oracles;
pub mod proxmodel;
pub mod solvers;
pub mod vecdom;

pub use error::{Error, Result};
