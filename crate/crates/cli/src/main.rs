mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Failure;

/// One line: `error[Kind]: message`.
fn report_error(kind: &str, message: &str) {
    let message = message
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    eprintln!("error[{kind}]: {message}");
}

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(argv) => argv,
        Err(message) => {
            report_error("Usage", &message);
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.kind().to_string();
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or(&rendered)
                .trim_start_matches("error: ");
            report_error("Usage", first);
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Annotate(a) => commands::annotate(a),
        Command::Network(a) => commands::network(a),
        Command::Stats(a) => commands::stats(a),
        Command::Pairs(a) => commands::pairs(a),
        Command::Fit(a) => commands::fit(a),
        Command::Report(a) => commands::report(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(message)) => {
            report_error("Usage", &message);
            ExitCode::from(2)
        }
        Err(Failure::Pipeline(e)) => {
            report_error(e.kind(), &e.to_string());
            ExitCode::from(1)
        }
    }
}
