use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    accinfo::cli::run(accinfo::cli::Args::parse())
}
