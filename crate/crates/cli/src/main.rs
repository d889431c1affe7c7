use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = poik_cli::Cli::parse();
    match poik_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("poik: {}", failure.message());
            failure.exit_code()
        }
    }
}
