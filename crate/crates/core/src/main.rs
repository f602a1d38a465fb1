mod cli;

use clap::Parser;

use bhent::BhError;
use cli::{Cli, Failure};

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    if let Ok(n) = std::env::var("BHENT_THREADS") {
        match n.parse::<usize>() {
            Ok(threads) if threads > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
                    eprintln!("bhent: cannot set up {threads} threads: {e}");
                    std::process::exit(1);
                }
            }
            _ => {
                eprintln!("bhent: BHENT_THREADS must be a positive integer, got {n:?}");
                std::process::exit(2);
            }
        }
    }

    if let Err(failure) = cli::run(cli) {
        match &failure {
            Failure::Usage(msg) => eprintln!("bhent: {msg}"),
            Failure::Run(BhError::InfeasibleDimension { dim, cap }) => {
                eprintln!("bhent: scenario needs a basis of estimated dimension {dim}, above the cap of {cap}")
            }
            Failure::Run(e) => eprintln!("bhent: {e}"),
            Failure::Checks => eprintln!("bhent: some checks failed"),
        }
        std::process::exit(failure.exit_code());
    }
}
