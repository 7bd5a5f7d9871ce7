use std::process::ExitCode;

use boxres::cli::{run, Cli, EXIT_INVALID_INPUT};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID_INPUT as u8);
        }
    };
    match cli.command.output() {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.body) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_INVALID_INPUT as u8);
            }
        }
        None => print!("{}", outcome.body),
    }
    ExitCode::from(outcome.code as u8)
}
