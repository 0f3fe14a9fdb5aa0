//! Configured experiment suites and their reports, shared by the command-line front end
//! and the acceptance harness.

pub mod config;
pub mod report;
pub mod suites;

pub use config::ExperimentConfig;
pub use report::{Check, Summary, SuiteReport, Table};
pub use suites::{run, RunOptions, Suite};
