use clap::Parser;

fn main() {
    let cli = charmat::cli::Cli::parse();
    std::process::exit(charmat::cli::run(cli));
}
