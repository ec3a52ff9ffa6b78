use std::process::ExitCode;

use clap::Parser;
use nitsche_bem::cli::{execute, resolve, summary_text, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    let manifest = match resolve(&args) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(&manifest) {
        Ok(outcome) => {
            print!("{}", summary_text(&manifest, &outcome));
            println!("csv = {}", manifest.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
