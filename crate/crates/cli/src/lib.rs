//! Scenario runner for the shadow-position simulator.

mod cli;
pub mod harness;
pub mod scenario;

pub use cli::{run_cli, run_cli_with, EXIT_USAGE};
