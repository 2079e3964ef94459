//! `collatz`: batch front end for collatz-core.
//!
//! Exit status: 0 on success, 2 on usage or input errors, 3 when a checked
//! invariant fails (a JSON witness block is written to stdout), 1 on I/O failure.

mod args;
mod commands;
mod config;
mod numparse;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use collatz_core::report::envelope;
use collatz_core::Error;
use serde_json::json;

use args::Cli;
use config::RunConfig;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Falsified { .. } => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::resolve(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global().is_err() {
        eprintln!("warning: thread pool already initialised");
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match commands::run(&cli.command, &cfg) {
        Ok(o) => match o.render(cfg.format, &mut out).and_then(|_| out.flush()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Falsified { claim, witness } = &e {
                let block = envelope("falsified", &json!({ "claim": claim, "witness": witness }));
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&block).unwrap_or_default());
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
