use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use memtrans::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli).and_then(|r| Ok((r.render(cli.config.format)?, r.status))) {
        Ok((out, status)) => {
            // a closed pipe is not worth a panic
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::from(status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
