use std::process::ExitCode;

use clap::Parser;
use hmsched_cli::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("hmsched: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
