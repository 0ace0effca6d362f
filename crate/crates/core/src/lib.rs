//! Pedestrian arrival-rate estimation from a moving sensing vehicle.
//!
//! The crate is organised bottom-up:
//!
//! - [`network`]: directed pedestrian graph, routes and link rates.
//! - [`simkit`]: pedestrians and a sensing vehicle on that graph, producing
//!   an [`eventlog::EventLog`].
//! - [`estimator`]: projected observation windows, the independence filter
//!   and Poisson rate estimates with confidence bounds.
//! - [`fusion`]: camera/LIDAR detection scoring (distributed and
//!   maximum-likelihood fusion) and ROC evaluation.
//! - [`experiment`]: batch experiments and their reports.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eventlog;
pub mod estimator;
pub mod experiment;
pub mod fusion;
pub mod geom;
pub mod network;
pub mod simkit;
pub mod stats;
