//! Scenario runner and file formats for `qfilter-core`.
//!
//! A [`config::ScenarioConfig`] selects one of the scenarios in
//! [`scenarios`]; [`scenarios::execute`] produces tables, text artifacts and
//! invariant checks, which [`output::write_outcome`] writes with manifests.
//! Trajectory ensembles fan out over a rayon pool with seed-per-trajectory
//! streams and order-fixed reductions ([`ensemble`]).

// `!(a < b)` guards reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod ensemble;
pub mod error;
pub mod logic;
pub mod output;
pub mod scenarios;
pub mod schema;

pub use config::{Format, Overrides, Scenario, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use output::{Check, Outcome, Table};
