// SPDX-License-Identifier: Apache-2.0

use std::io;

use clap::Parser;
use symtrans::smtlib::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (_, config) = cli.command.config();
    let level = match config.verbosity {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    let code = run(&cli.command, &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
