use clap::Parser;

fn main() {
    let cli = dirconf::cli::Cli::parse();
    if let Err(e) = dirconf::cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
