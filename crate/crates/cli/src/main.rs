use clap::Parser;

fn main() {
    let cli = vweave_cli::Cli::parse();
    if let Err(e) = vweave_cli::run(cli) {
        eprintln!("vweave: {e}");
        std::process::exit(1);
    }
}
