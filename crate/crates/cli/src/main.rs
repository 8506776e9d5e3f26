use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = actseg::Cli::parse();
    match actseg::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // one line: the whole context chain, colon-separated
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("actseg: error: {msg}");
            ExitCode::from(2)
        }
    }
}
