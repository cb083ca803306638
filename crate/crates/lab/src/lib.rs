//! Configuration-driven experiments on top of `meanfield-core`.

pub mod config;
pub mod report;
pub mod runner;

pub use config::ExperimentConfig;
pub use report::RunReport;
pub use runner::{run, RunContext};
