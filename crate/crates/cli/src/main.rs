use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use mico_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::debug!("command failed: {e:?}");
            eprintln!("error: {e}");
            eprintln!("{}", e.code);
            ExitCode::from(1)
        }
    }
}
