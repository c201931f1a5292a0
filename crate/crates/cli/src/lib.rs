//! Library half of the `zigloc` command-line tool: scenario files, output
//! writers and the subcommand implementations.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenario_file;

pub use error::CliError;
