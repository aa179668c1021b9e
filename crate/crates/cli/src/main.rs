mod args;
mod report;
mod run;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::args::{Cli, Output};
use crate::report::ExperimentReport;
use crate::run::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli, started) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("inbl: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli, started: Instant) -> Result<u8, CliError> {
    let out = run::execute(&cli.global, &cli.command)?;
    let raw = out.raw;
    let report = ExperimentReport {
        command: std::env::args().skip(1).collect(),
        seed: cli.global.seed,
        parameters: out.parameters,
        records: out.records,
        summary: out.summary,
        duration_ms: started.elapsed().as_millis() as u64,
    };
    let text = match (raw, cli.global.output) {
        (Some(raw), _) => raw,
        (None, Output::Json) => report.to_json(),
        (None, Output::Table) => report.to_table(),
    };
    match &cli.global.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe is not worth a failure exit.
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    Ok(out.exit as u8)
}
