//! `nlcu`: run scenarios, convergence studies and invariant checks.
//!
//! Exit status is 0 on success, 1 for invalid input and 2 for numerical
//! failures or failed checks.

mod args;
mod check;
mod commands;
mod error;
mod settings;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve(a) => commands::solve(a),
        Command::Converge(a) => commands::converge(a),
        Command::Check(a) => check::check(a),
        Command::Scenarios => {
            commands::scenarios();
            Ok(())
        }
    }
}
