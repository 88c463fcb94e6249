mod args;
mod commands;
mod config;
mod diag;
mod error;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let argv = config::expand(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            let text = e.render().to_string();
            let text = text.trim_end();
            return Err(CliError::Usage(text.strip_prefix("error: ").unwrap_or(text).to_string()));
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Train(cmd) => commands::train(cmd, cli.seed, &cli.out),
        Command::Sample(cmd) => commands::sample(cmd, cli.seed, &cli.out),
        Command::Recall(cmd) => commands::recall(cmd, cli.seed),
        Command::Sweep(cmd) => commands::sweep(cmd, cli.seed, &cli.out),
        Command::Match(cmd) => commands::matching(cmd),
        Command::Inspect(cmd) => commands::inspect(cmd, cli.seed),
        Command::Synth(cmd) => commands::synth(cmd, cli.seed, &cli.out),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
