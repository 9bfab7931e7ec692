use std::process::ExitCode;

use clap::Parser;

use mwgate::cli::app::{run, Cli};

fn main() -> ExitCode {
    match run(&Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
