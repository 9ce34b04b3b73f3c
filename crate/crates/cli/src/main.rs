use std::process::ExitCode;

use clap::Parser;
use env_logger::Env;
use halfspace_rabi_cli::{execute, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
            if report.failed_rows > 0 {
                eprintln!("{} row(s) failed; see the reason column", report.failed_rows);
                if !cli.allow_partial {
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
