use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qdcert::{emit, load_scenario, run, Format, RunOptions};

/// Certify approximately multiplicative, equivariant matrix models of group
/// actions described by a scenario file.
#[derive(Parser, Debug)]
#[command(name = "qdcert", version)]
struct Cli {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest sample grid the refinement loop may reach.
    #[arg(long)]
    max_dim: Option<usize>,
    /// Record wall time per sweep point.
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, source) = match load_scenario(&cli.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("qdcert: {}: {e}", cli.scenario.display());
            return ExitCode::from(2);
        }
    };
    let report = run(&scenario, &source, &RunOptions { max_dim: cli.max_dim, timing: cli.timing });
    let text = emit(&report, cli.format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("qdcert: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    for e in &report.errors {
        eprintln!("qdcert: {} [{}]: {}", e.id, e.code, e.message);
    }
    ExitCode::from(report.exit_code() as u8)
}
