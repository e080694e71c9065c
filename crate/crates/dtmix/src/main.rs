use std::process::ExitCode;

use clap::Parser;
use dtmix::args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap reports usage errors with 2 and --help / --version with 0
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    ExitCode::from(dtmix::run(cli))
}
