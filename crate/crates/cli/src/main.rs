//! `steinlab` command-line entry point.
//!
//! Exit codes: 0 success, 1 computation failure, 2 input error. Errors go to
//! stderr as a JSON object.

mod args;
mod commands;
mod error;
mod report;
mod repro;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use error::{CliError, CliResult};
use report::Report;

const THREADS_VAR: &str = "STEINLAB_THREADS";

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(THREADS_VAR, format!("expected a positive integer, found {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Compute(e.to_string()))
}

fn dispatch(cli: &Cli) -> CliResult<Report> {
    let g = &cli.global;
    match &cli.command {
        Command::Exponent(a) => commands::exponent(g, a),
        Command::Kappa => commands::kappa(g),
        Command::Bounds(a) => commands::bounds(g, a),
        Command::Iproject => commands::iproject(g),
        Command::Qproject(a) => commands::qproject(g, a),
        Command::Maxmin(a) => commands::maxmin(g, a),
        Command::Blowup(a) => commands::blowup(g, a),
        Command::Simulate(a) => commands::simulate(g, a),
        Command::Repro(a) => repro::run(json!({"seed": g.seed}), a.item.as_deref()),
    }
}

fn emit(cli: &Cli, report: &Report) -> CliResult<()> {
    let bytes = report
        .render(cli.global.format)
        .map_err(|e| CliError::Compute(format!("cannot render report: {e}")))?;
    match &cli.global.output {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Compute(e.to_string())),
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    let report = dispatch(cli)?;
    emit(cli, &report)?;
    if report.passed {
        return Ok(());
    }
    let failed = report.results["failed"].as_u64().unwrap_or(1) as usize;
    Err(CliError::ReproFailed { failed })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = report::to_json_bytes(&e.to_json()).unwrap_or_default();
            let mut err = std::io::stderr();
            let _ = err.write_all(&body);
            let _ = err.write_all(b"\n");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
