use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use oligofix_cli::config::SEED_ENV;
use oligofix_cli::report::emit;
use oligofix_cli::run::{EXIT_CONFIG, EXIT_FAILURE};
use oligofix_cli::{parse_config, run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_CONFIG as u8),
            };
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let cfg = match parse_config(&cli, env_seed.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("oligofix: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("oligofix: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for w in &outcome.envelope.warnings {
        eprintln!("warning: {w}");
    }
    if let Err(e) = emit(&outcome.rendered, cfg.out.as_deref()) {
        eprintln!("oligofix: I/O failure: {e}");
        return ExitCode::from(EXIT_FAILURE as u8);
    }
    ExitCode::from(outcome.exit_code as u8)
}
