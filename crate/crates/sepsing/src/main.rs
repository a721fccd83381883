use clap::Parser;

use sepsing::cli::{execute, Cli};

fn main() {
    std::process::exit(execute(Cli::parse()));
}
