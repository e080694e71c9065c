//! Command-line front end for `dtmix-core`.

pub mod args;
pub mod augment;
pub mod commands;
pub mod exit;

use args::{Cli, Command};
use exit::Failure;

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = match &cli.command {
        Command::Edt(a) => commands::edt_cmd(a),
        Command::Mix(a) => commands::mix_cmd(a),
        Command::Augment(a) => commands::augment_cmd(a),
        Command::Bench(a) => commands::bench_cmd(a),
        Command::Selfcheck => commands::selfcheck_cmd(),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("dtmix: error: {message}");
            code
        }
    }
}
