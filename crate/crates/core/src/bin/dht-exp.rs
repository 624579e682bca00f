use clap::Parser;
use dht_exponents::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
