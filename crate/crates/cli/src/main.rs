use std::process::ExitCode;

use clap::Parser;
use rabi_cli::app::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("rabi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
