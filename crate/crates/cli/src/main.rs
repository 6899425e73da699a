//! `fairpca` command-line tool.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure. Messages go to standard error.

mod commands;
mod config;
mod error;
mod table;

use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = config::Cli::parse();
    if let Err(e) = commands::run(cli.command, cli.threads) {
        if e.is_broken_pipe() {
            return;
        }
        eprintln!("error: {}", e.report());
        std::process::exit(e.exit_code());
    }
}
