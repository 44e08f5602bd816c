//! Command-line front end: problem and graph files in, CSV trajectories and a
//! JSON summary out.

pub mod commands;
pub mod error;
pub mod output;
pub mod problem;

pub use commands::{cmd_connectivity, cmd_example, cmd_solve, RunOptions, EXAMPLES};
pub use error::CliError;
pub use output::RunSummary;
