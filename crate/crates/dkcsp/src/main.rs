use std::io::Write;

use clap::Parser;

fn main() {
    let cli = dkcsp::cli::Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let code = dkcsp::cli::dispatch(cli, &mut stdout);
    let _ = stdout.flush();
    std::process::exit(code);
}
