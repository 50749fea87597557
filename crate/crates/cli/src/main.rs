use std::process::ExitCode;

use clap::Parser;
use signal_analysis_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // --help and --version land here too
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or_default();
            let err = CliError::Usage(first.trim_start_matches("error: ").to_string());
            eprintln!("{}", err.record(""));
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record(cli.command.name()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
