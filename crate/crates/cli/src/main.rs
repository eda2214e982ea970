use clap::Parser;
use magnon_sim::{init_threads, run, Cli};

fn main() {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| run(cli, &mut std::io::stdout().lock()));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
