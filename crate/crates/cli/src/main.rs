use clap::Parser;

fn main() {
    let cli = napspmv_cli::args::Cli::parse();
    std::process::exit(napspmv_cli::run(cli));
}
