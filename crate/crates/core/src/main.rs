use clap::Parser;
use finestruct::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
