//! Command-line front end for `signal-analysis`.

pub mod args;
mod commands;
pub mod emit;
pub mod error;
pub mod manifest;

pub use args::Cli;
pub use error::CliError;
pub use manifest::RunManifest;

use emit::{write_atomic, write_stdout};

/// Runs a parsed command line end to end.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    execute(&RunManifest::from_cli(cli)?)
}

/// Computes everything first, then writes. Validation problems are reported
/// after their diagnostics have been written.
pub fn execute(m: &RunManifest) -> Result<(), CliError> {
    let (output, failure) = commands::run_command(m)?;
    let files = output.files(m.format, m.command.name());
    match &m.out {
        Some(dir) => write_atomic(dir, &files)?,
        None => write_stdout(&files)?,
    }
    failure.map_or(Ok(()), Err)
}
