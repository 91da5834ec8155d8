//! Configuration ingestion, experiment orchestration, and CSV/SVG emission.

pub mod config;
pub mod output;
pub mod run;

pub use config::{load_config, CliError, Experiment, RunConfig};
pub use run::run;
