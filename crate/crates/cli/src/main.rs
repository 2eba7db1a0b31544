//! Command-line front end: `twoedge <task> --config run.toml [--out DIR] [--format csv|json] [--threads N]`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use twoedge::io::{parse_config, run, ConfigError, OutputFormat, Task};

#[derive(Parser)]
#[command(name = "twoedge", version, about = "Spectral experiments on a two-edge graph with jump-discontinuous mass")]
struct Cli {
    #[command(subcommand)]
    task: TaskCmd,
}

#[derive(Subcommand)]
enum TaskCmd {
    /// Positive roots with residuals and multiplicities.
    Spectrum(Flags),
    /// Leaning series with Cesaro mean and tail extremes.
    Leaning(Flags),
    /// Torus histogram against the analytic equidistribution density.
    Bg(Flags),
    /// Torus points of the spectrum.
    Torus(Flags),
    /// Wigner function of one eigenfunction on a grid.
    Wigner(Flags),
    /// Limiting Wigner function at a zero-set point of the segment condition.
    Semiclassical(Flags),
    /// Invariant suites for every catalog condition.
    Verify(Flags),
}

#[derive(Args)]
struct Flags {
    /// Run description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format; overrides `format` in the config.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads, 0 for all cores; overrides `threads` in the config.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Csv,
    Json,
}

impl TaskCmd {
    fn split(self) -> (Task, Flags) {
        match self {
            TaskCmd::Spectrum(f) => (Task::Spectrum, f),
            TaskCmd::Leaning(f) => (Task::Leaning, f),
            TaskCmd::Bg(f) => (Task::Bg, f),
            TaskCmd::Torus(f) => (Task::Torus, f),
            TaskCmd::Wigner(f) => (Task::Wigner, f),
            TaskCmd::Semiclassical(f) => (Task::Semiclassical, f),
            TaskCmd::Verify(f) => (Task::Verify, f),
        }
    }
}

fn execute(cmd: TaskCmd) -> Result<bool, ConfigError> {
    let (task, flags) = cmd.split();
    let text = std::fs::read_to_string(&flags.config)
        .map_err(|e| ConfigError::Io(format!("{}: {e}", flags.config.display())))?;
    let mut cfg = parse_config(&text)?;
    cfg.task = task;
    if let Some(out) = flags.out {
        cfg.out = out.to_string_lossy().into_owned();
    }
    if let Some(f) = flags.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(n) = flags.threads {
        cfg.threads = n;
    }
    let outcome = run(&cfg)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(outcome.success)
}

fn main() -> ExitCode {
    match execute(Cli::parse().task) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed; see report.json");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
