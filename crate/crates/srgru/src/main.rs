use clap::Parser;

use srgru::cli::args::Cli;
use srgru::Error;

/// 0 success; 1 runtime failure; 2 usage or configuration error (clap's own
/// parse failures also exit 2).
fn main() {
    let cli = Cli::parse();
    if let Err(e) = cli.command.run() {
        eprintln!("srgru: {e}");
        let code = match e {
            Error::Config(_) => 2,
            _ => 1,
        };
        std::process::exit(code);
    }
}
