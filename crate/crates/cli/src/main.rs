mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let argv = match config::merge(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(problems) => {
            for p in problems {
                eprintln!("error: {p}");
            }
            return ExitCode::from(2);
        }
    };
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    let result = match &cli.command {
        Command::Rates(a) => commands::rates(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::BreakEven(a) => commands::break_even(a),
        Command::OptimizeTree(a) => commands::optimize_tree(a),
        Command::Verify(a) => commands::verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(exit) => {
            for m in exit.messages() {
                eprintln!("{m}");
            }
            ExitCode::from(exit.code() as u8)
        }
    }
}
