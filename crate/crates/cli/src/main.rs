use clap::Parser;
use liability_cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
