use clap::Parser;

fn main() {
    std::process::exit(masense::cli::run(masense::cli::Cli::parse()));
}
