use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = lacuna_cli::cli::Cli::parse();
    match lacuna_cli::cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
