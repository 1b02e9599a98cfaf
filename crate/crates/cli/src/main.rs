mod commands;
mod config;
mod error;
mod parse;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;

use crate::commands::Outcome;
use crate::config::{Cli, Run, THREADS_ENV};
use crate::error::CliError;

fn emit(run: &Run, table: &table::Table) -> Result<(), CliError> {
    match &run.out {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            table.write(run.format, &mut w)?;
            w.flush().map_err(|e| CliError::Io(e.to_string()))
        }
        None => table.write(run.format, io::stdout().lock()),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let run = cli.resolve(std::env::var(THREADS_ENV).ok())?;
    if let Some(k) = run.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::field("threads", e))?;
    }
    match commands::run(&run)? {
        Outcome::Table(t) => emit(&run, &t),
        Outcome::Checklist { table, items } => {
            if run.out.is_some() {
                emit(&run, &table)?;
            }
            let mut out = io::stdout().lock();
            for it in &items {
                let mark = if it.passed { "PASS" } else { "FAIL" };
                writeln!(out, "[{mark}] {}: {}", it.name, it.detail)
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
            let failed: Vec<&str> = items
                .iter()
                .filter(|i| !i.passed)
                .map(|i| i.name.as_str())
                .collect();
            writeln!(
                out,
                "{}/{} checks passed",
                items.len() - failed.len(),
                items.len()
            )
            .map_err(|e| CliError::Io(e.to_string()))?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Reproduction(failed.join(", ")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
