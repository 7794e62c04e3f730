//! File formats, reports and the command-line front end over
//! [`finsler_core`].

pub mod codec;
pub mod commands;
pub mod error;
pub mod report;

pub use commands::{run, Command, Outcome, RunConfig};
pub use error::{CliError, CliResult};
