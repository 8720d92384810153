use std::path::PathBuf;
use std::process::ExitCode;

use anomaly_forge::output::write_atomic;
use anomaly_forge::run::exit;
use anomaly_forge::{parse_job, run, Command};
use clap::Parser;

/// Relative chiral charges on model spacetimes.
#[derive(Debug, Parser)]
#[command(name = "anomaly-forge", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON job document.
    #[arg(long)]
    job: PathBuf,
    /// Report path; overrides `output.report_path`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized commands; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.job) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.job.display());
            return code(exit::USAGE);
        }
    };
    let mut job = match parse_job(&text) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: invalid job {}: {e}", cli.job.display());
            return code(exit::USAGE);
        }
    };
    if cli.seed.is_some() {
        job.seed = cli.seed;
    }
    let outcome = run(cli.command, &job);
    for w in &outcome.report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(e) = &outcome.report.error {
        match &e.pointer {
            Some(p) => eprintln!("error ({}): {} (at {p})", e.kind, e.message),
            None => eprintln!("error ({}): {}", e.kind, e.message),
        }
    }

    let mut json = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
    json.push('\n');
    match cli.out.as_ref().or(job.output.report_path.as_ref()) {
        Some(path) => {
            if let Err(e) = write_atomic(path, json.as_bytes()) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return code(exit::IO);
            }
        }
        None => print!("{json}"),
    }
    if let (Some(bytes), Some(path)) = (&outcome.csv, &job.output.csv_path) {
        if let Err(e) = write_atomic(path, bytes) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return code(exit::IO);
        }
    }
    code(outcome.exit_code())
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}
