use clap::Parser;

fn main() {
    std::process::exit(epsdyadic_cli::run(epsdyadic_cli::Cli::parse()));
}
