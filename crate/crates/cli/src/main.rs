//! `mage`: batch front end for the Monge-Ampère engine.
//!
//! Reads an equation file, runs one analysis pipeline and writes a JSON
//! report to stdout (or `--out`) with a short summary on stderr.

mod input;
mod report;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use mage_core::expr::ZeroTestConfig;
use mage_core::Error;

use input::{BoxSpec, EquationFile, InputError};
use run::{Command, Run};

const EXIT_INPUT: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;
const EXIT_INTERNAL: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "mage", version, about = "Analyse symplectic Monge-Ampère equations in two variables")]
struct Cli {
    /// Pipeline to run.
    #[arg(value_enum)]
    command: Command,
    /// Equation file (INI with [equation], [analysis], [inputs]).
    file: String,
    /// Seed of the randomized zero tests.
    #[arg(long)]
    seed: Option<u64>,
    /// Sample points per zero test (at least 8).
    #[arg(long)]
    samples: Option<usize>,
    /// Absolute and relative tolerance of the zero tests.
    #[arg(long)]
    tol: Option<f64>,
    /// Sampling interval for one coordinate, e.g. `p1=-2:-0.3`. Repeatable.
    #[arg(long = "box", value_name = "COORD=LO:HI")]
    boxes: Vec<BoxSpec>,
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    out: Option<String>,
    /// Machine output only: suppress the stderr summary.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(execute(&cli))
}

fn execute(cli: &Cli) -> u8 {
    let file = match load(cli) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("mage: {e}");
            return EXIT_INPUT;
        }
    };
    let cfg = match config(cli, &file) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mage: {e}");
            return EXIT_INPUT;
        }
    };
    let mut run = Run::new(cli.command, &file, cfg);
    let result = run.execute(cli.command);
    let (violation, inconclusive) = (run.violation.clone(), run.inconclusive());
    let outcome = &mut run.report.outcome;
    match result {
        Err(e) => {
            let (status, code) = classify_error(&e);
            outcome.status = status;
            outcome.exit_code = code as i32;
            outcome.message = Some(e.to_string());
            outcome.witness = e.witness();
        }
        Ok(()) if violation.is_some() => {
            let (msg, witness) = violation.unwrap_or_default();
            outcome.status = "precondition";
            outcome.exit_code = EXIT_PRECONDITION as i32;
            outcome.message = Some(msg);
            outcome.witness = witness;
        }
        Ok(()) if inconclusive => {
            outcome.status = "inconclusive";
            outcome.exit_code = EXIT_INCONCLUSIVE as i32;
            outcome.message = Some("a zero test was inconclusive".into());
        }
        Ok(()) => {}
    }
    let code = run.report.outcome.exit_code as u8;
    let json = match serde_json::to_string_pretty(&run.report) {
        Ok(j) => j + "\n",
        Err(e) => {
            eprintln!("mage: cannot serialize report: {e}");
            return EXIT_INTERNAL;
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &json),
        None => std::io::stdout().lock().write_all(json.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("mage: cannot write report: {e}");
        return EXIT_INPUT;
    }
    if !cli.json {
        let mut err = std::io::stderr().lock();
        let _ = writeln!(err, "{} {}", cli.command.name(), cli.file);
        for line in &run.summary {
            let _ = writeln!(err, "  {line}");
        }
        let o = &run.report.outcome;
        let _ = match &o.message {
            Some(m) => writeln!(err, "  {}: {m}", o.status),
            None => writeln!(err, "  {}", o.status),
        };
    }
    code
}

fn load(cli: &Cli) -> Result<EquationFile, InputError> {
    let file = EquationFile::read(&cli.file)?;
    let inputs = &file.inputs;
    let need = match cli.command {
        Command::Genfun if inputs.f.is_none() => Some("f"),
        Command::Conslaw if inputs.alpha.is_none() => Some("alpha"),
        Command::Kaehler if inputs.theta.is_none() => Some("theta"),
        _ => None,
    };
    match need {
        Some(name) => Err(InputError::MissingInput(name)),
        None => Ok(file),
    }
}

/// File settings first, then command-line overrides.
fn config(cli: &Cli, file: &EquationFile) -> Result<ZeroTestConfig, String> {
    let a = &file.analysis;
    let mut cfg = ZeroTestConfig::default();
    if let Some(seed) = cli.seed.or(a.seed) {
        cfg = cfg.with_seed(seed);
    }
    if let Some(n) = cli.samples.or(a.samples) {
        cfg = cfg.with_samples(n);
    }
    if let Some(tol) = cli.tol.or(a.tol) {
        cfg = cfg.with_tol(tol);
    }
    for b in a.boxes.iter().chain(&cli.boxes) {
        cfg = cfg.with_box(b.coord, b.lo, b.hi);
    }
    if !cfg.is_valid() {
        return Err("invalid analysis settings: samples must be at least 8 and tol positive".into());
    }
    Ok(cfg)
}

fn classify_error(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Parse(_) | Error::FormSyntax(_) | Error::Config(_) => ("input", EXIT_INPUT),
        Error::Inconclusive(_) => ("inconclusive", EXIT_INCONCLUSIVE),
        Error::Singular { .. } | Error::Precondition { .. } | Error::Degenerate { .. } | Error::NonPolynomial(_) => {
            ("precondition", EXIT_PRECONDITION)
        }
        Error::Calibration(_) => ("internal", EXIT_INTERNAL),
    }
}
