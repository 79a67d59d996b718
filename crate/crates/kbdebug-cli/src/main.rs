use clap::Parser;
use kbdebug_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdin = std::io::stdin();
    if let Err(e) = run(cli, &mut stdin.lock(), &mut std::io::stdout()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
