use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use zgw_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = run(&cli);
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(out) => {
            println!("{}", out.json);
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
