use std::process::ExitCode;

use clap::Parser;
use mrtg_cli::{execute_with_threads, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute_with_threads(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
