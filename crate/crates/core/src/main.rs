use clap::Parser;

fn main() {
    let cli = dirloud::cli::Cli::parse();
    std::process::exit(dirloud::cli::run(&cli));
}
