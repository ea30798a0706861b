use std::process::ExitCode;

use clap::Parser;
use ddpc_cli::{commands, Cli};

fn main() -> ExitCode {
    let level = match commands::log_level(std::env::var("DDPC_LOG").ok().as_deref()) {
        Ok(level) => level,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match cli.run() {
        Ok(report) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report.json).expect("JSON values serialize")
            );
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
