//! Command-line front end: system analysis, data collection, single
//! problem solves, closed-loop runs and the reference experiment.

pub mod cli;
pub mod commands;
pub mod config;

pub use cli::{Cli, Command};
pub use commands::Report;
pub use config::ExperimentConfig;
