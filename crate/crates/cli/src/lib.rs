//! Scenario files, the built-in registry and run artifacts for the `crflow`
//! command line tool.

pub mod error;
pub mod runner;
pub mod scenario;
pub mod schema;

pub use error::{CliError, Result};
pub use runner::{run_scenario, RunOutcome};
pub use scenario::{parse_config, registry, Scenario};
