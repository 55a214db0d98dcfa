use clap::Parser;

fn main() {
    let cli = kabelian::cli::Cli::parse();
    if let Err(e) = kabelian::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
