use clap::Parser;

use cdn_energy::cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let code = execute(cli, &mut std::io::stdout().lock());
    std::process::exit(code);
}
