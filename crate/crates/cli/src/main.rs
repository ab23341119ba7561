use std::process::ExitCode;

use clap::Parser;
use relaxometer_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if err.is_broken_pipe() => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("relaxometer: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
