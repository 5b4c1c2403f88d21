use clap::Parser;
use thickpart_cli::{configure_threads, execute, Cli, EXIT_ERROR};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        std::process::exit(EXIT_ERROR);
    }
    let mut stdout = std::io::stdout().lock();
    let code = match execute(&cli, &mut stdout) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    std::process::exit(code);
}
