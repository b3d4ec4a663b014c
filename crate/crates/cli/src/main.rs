use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fhs_cli::{configure_threads, exit, run, Cli, THREADS_ENV};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::PARAMS as u8 } else { 0 });
        }
    };
    if let Err(e) = configure_threads(std::env::var(THREADS_ENV).ok().as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(e.code() as u8);
    }
    let (outcome, code) = match run(&cli) {
        Ok(o) => (o, exit::OK),
        Err(f) => {
            let code = f.error.code();
            let mut o = f.outcome;
            o.stderr.push_str(&format!("error: {}\n", f.error));
            (o, code)
        }
    };
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(code as u8)
}
