use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use magbump_cli::{run, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            // a closed pipe (e.g. `| head`) must not turn a result into a panic
            let mut out = std::io::stdout().lock();
            for line in &outcome.artifacts.lines {
                let _ = writeln!(out, "{line}");
            }
            for f in &outcome.files {
                let _ = writeln!(out, "wrote {}", f.display());
            }
            let _ = writeln!(out, "{}", if outcome.code == 0 { "PASS" } else { "FAIL" });
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
