use std::process::ExitCode;

use clap::Parser;
use qipfot_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match qipfot_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qipfot: {e}");
            ExitCode::from(e.code)
        }
    }
}
