//! `statespace-kit <command> --input <path> --out <dir> [--tol name=value]... [--seed N]`
//!
//! Exit codes: 0 success, 1 library error (report written with the error),
//! 2 usage or I/O error (nothing written).

mod commands;
mod input;
mod report;

use clap::Parser;
use commands::{Context, Tolerances, COMMANDS};
use input::Input;
use report::{report_json, write_bundle, ReportHeader};
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "statespace-kit", version, about = "State-space analysis and control design")]
struct Args {
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(COMMANDS))]
    command: String,
    /// JSON input: a model, or an object with "model" and command parameters.
    #[arg(long)]
    input: PathBuf,
    /// Directory receiving report.json and any CSV files.
    #[arg(long)]
    out: PathBuf,
    /// Override a numeric setting, e.g. --tol sim_step=1e-4.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn usage(message: &str) -> ExitCode {
    eprintln!("statespace-kit: {message}");
    ExitCode::from(2)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("STATESPACE_KIT_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("STATESPACE_KIT_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Err(msg) = configure_threads() {
        return usage(&msg);
    }
    let mut tol = Tolerances::default();
    for item in &args.tol {
        let Some((name, value)) = item.split_once('=') else {
            return usage(&format!("--tol expects NAME=VALUE, got {item:?}"));
        };
        let Ok(value) = value.trim().parse::<f64>() else {
            return usage(&format!("--tol {name}: {value:?} is not a number"));
        };
        if let Err(msg) = tol.set(name.trim(), value) {
            return usage(&msg);
        }
    }
    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => return usage(&format!("cannot read {}: {e}", args.input.display())),
    };
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    let header = ReportHeader { command: &args.command, input_sha256: &digest, seed: args.seed, tolerances: tol.to_json() };
    let outcome = Input::parse(&text).and_then(|input| {
        let ctx = Context { input: &input, tol: &tol, seed: args.seed };
        commands::run(&args.command, &ctx)
    });
    let (report, files, code) = match &outcome {
        Ok(o) => (report_json(&header, Ok(o)), o.files.as_slice(), ExitCode::SUCCESS),
        Err(e) => {
            eprintln!("statespace-kit: {} failed: {e}", args.command);
            (report_json(&header, Err(e)), &[][..], ExitCode::from(1))
        }
    };
    if let Err(e) = write_bundle(&args.out, &report, files) {
        return usage(&format!("cannot write to {}: {e}", args.out.display()));
    }
    code
}
