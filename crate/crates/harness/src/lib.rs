//! Experiment orchestration, file formats and reports for `kss-core`.
//!
//! A sweep is described by an [`ExperimentConfig`] (JSON). Each trial derives
//! its own seed from the master seed (see [`seed`]), builds or loads data,
//! initializes, runs the K-subspaces loop and is summarized in a
//! [`report::TrialRecord`]. Reports are JSON; per-iteration traces are CSV
//! with the columns `trial,t,dF2_plus_eps,objective,dhat_json`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod report;
pub mod schema;
pub mod seed;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_trial, write_outputs};
