//! Command-line front end for `qmeas-core`: scenario files, parameter
//! sweeps, relation checks, witness search and the spin-1/2 reproduction
//! table.

pub mod cli;
pub mod commands;
pub mod error;
pub mod report;
pub mod reproduce;
pub mod scenario;

pub use cli::run;
pub use error::CliError;
pub use scenario::{parse_scenario, Scenario, ScenarioError, ScenarioFile};
