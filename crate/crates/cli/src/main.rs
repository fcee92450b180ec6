use std::process::ExitCode;

use clap::Parser;
use hhdr_runner::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hhdr {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
