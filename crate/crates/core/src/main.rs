use clap::Parser;

fn main() {
    let cli = postpred::cli::Cli::parse();
    std::process::exit(postpred::cli::run(cli));
}
