// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use srampuf::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("srampuf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
