//! Command-line driver for `bergman-extremal`: JSON run configurations, CSV/JSON
//! reports, PNG level-set heatmaps and the acceptance suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod heatmap;
pub mod report;
pub mod suite;
mod whitney_check;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use error::CliError;
