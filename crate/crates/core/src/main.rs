use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use omnirelay::cli::{run, Cli, ExperimentConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let detail = text.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("error=config {detail}");
            return ExitCode::FAILURE;
        }
    };
    let result = ExperimentConfig::from_cli(cli).and_then(|config| {
        let text = run(&config)?;
        if config.out.is_none() {
            print!("{text}");
            let _ = std::io::stdout().flush();
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let detail = e.to_string().replace('\n', " ");
            eprintln!("error={} {detail}", e.code());
            ExitCode::FAILURE
        }
    }
}
