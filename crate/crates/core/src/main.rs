use clap::Parser;

fn main() {
    let cli = gauss_avoid::cli::Cli::parse();
    std::process::exit(gauss_avoid::cli::run(&cli));
}
