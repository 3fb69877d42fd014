use std::process::ExitCode;

use clap::Parser;
use spbox::cli::{run, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match run(&config) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
