mod args;
mod commands;
mod error;
mod inputs;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use error::CliError;

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::config(format!("worker pool: {e}")))?;
    }
    let out = commands::run(cli.command)?;
    if let Some(dir) = &out.dir {
        for path in out.artifacts.commit(dir)? {
            println!("{}", path.display());
        }
    }
    print!("{}", out.stdout);
    let _ = std::io::stdout().flush();
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let message: Vec<&str> = text
                .lines()
                .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let err = CliError::config(message.join(" ").trim_start_matches("error: "));
            eprintln!("{}", err.to_json_line());
            return ExitCode::from(error::EXIT_CONFIG as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.code as u8)
        }
    }
}
