mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::RunConfig;
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match (&cli.command, cli.command.name()) {
        (Command::Replay { file }, _) => output::read_config(file)?.overridden(&cli.params)?,
        (_, Some(name)) => RunConfig::resolve(name, &cli.params)?,
        (_, None) => unreachable!("every non-replay command has a name"),
    };
    let (table, failure) = commands::run(&config)?;
    output::emit(&output::render(&config, &table), cli.params.out.as_deref())?;
    match failure {
        Some(name) => Err(CliError::Validation(format!("first failing check: {name}"))),
        None => Ok(()),
    }
}

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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shardprice: {e}");
            e.exit_code()
        }
    }
}
