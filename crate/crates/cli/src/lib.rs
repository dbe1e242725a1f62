//! Experiment harness around the `llmoea` library: single runs, experiment
//! grids with rank-sum statistics, operator distillation, indicator
//! evaluation and plot data.

pub mod backend;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod experiment;
pub mod runner;
pub mod stats;

pub use error::{exit_code, UsageError};
