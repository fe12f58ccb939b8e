use std::process::ExitCode;

use clap::Parser;
use phasegrad_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command.execute().and_then(|r| r.write(cli.command.out())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
