mod args;
mod commands;
mod cube;
mod error;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use error::CliError;

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Parse("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(format!("cannot start thread pool: {e}")))?;
    }
    if cli.show_defaults {
        return commands::show_defaults();
    }
    match cli.command {
        Some(Command::Constants(a)) => commands::constants(&a),
        Some(Command::Bound(a)) => commands::bound(&a),
        Some(Command::Certify(a)) => commands::certify(&a),
        Some(Command::Maxfn(a)) => commands::maxfn(&a),
        Some(Command::Jellium(a)) => commands::jellium(&a),
        None => {
            let _ = Cli::command().print_help();
            Err(CliError::Parse("no subcommand given".into()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
