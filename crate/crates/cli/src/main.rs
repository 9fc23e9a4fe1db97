use clap::Parser;

use gfib_cli::commands::{run, Command};

/// Exact k-order generalized Fibonacci sequences and their 2-adic orders.
#[derive(Parser)]
#[command(name = "gfib", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn main() {
    // clap exits with 2 on usage errors and 0 for --help/--version.
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            gfib_cli::commands::EXIT_USAGE
        }
    };
    std::process::exit(code);
}
