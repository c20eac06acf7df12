use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use squint_core::experiments::csv::csv_string;
use squint_core::experiments::{self, Preset, ScenarioConfig, ScenarioFile, SweepResult, ValidateOptions};
use squint_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "squint", version, about = "Beam squint sweeps for mutually coupled wideband arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario TOML; the figure subcommands fall back to their built-in scenario.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted. Sweep metadata goes to `<out>.meta.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override `sweep.points`.
    #[arg(long, global = true)]
    points: Option<usize>,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "SQUINT_THREADS")]
    threads: Option<usize>,

    /// Append `<column>_db` columns for every SNR column.
    #[arg(long, global = true)]
    db: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Instantaneous SNR versus frequency, weakly coupled array.
    Fig1a,
    /// Band-averaged SNR versus bandwidth, weakly coupled array.
    Fig1b,
    /// Instantaneous SNR versus frequency, tightly coupled array.
    Fig2,
    /// Squint loss versus bandwidth, weakly vs tightly coupled.
    Fig3,
    /// Generic sweep over the configured beamformers (requires --config).
    Sweep,
    /// Run the structural and closed-form checks; exits 4 on any failure.
    Validate,
}

impl Command {
    fn preset(self) -> Option<Preset> {
        match self {
            Command::Fig1a => Some(Preset::Fig1a),
            Command::Fig1b => Some(Preset::Fig1b),
            Command::Fig2 | Command::Validate => Some(Preset::Fig2),
            Command::Fig3 => Some(Preset::Fig3),
            Command::Sweep => None,
        }
    }
}

enum Failure {
    Config(String),
    Numeric(String),
    Validation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Io { .. } | Error::Domain { .. } => Failure::Config(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, Failure> {
    let mut file = match (&cli.config, cli.command.preset()) {
        (Some(path), _) => ScenarioFile::read(path).map_err(|e| Failure::Config(e.to_string()))?,
        (None, Some(p)) => p.file(),
        (None, None) => return Err(Failure::Config("sweep needs --config".to_string())),
    };
    if let Some(p) = cli.points {
        file.sweep.points = Some(p);
    }
    file.resolve().map_err(|e| Failure::Config(e.to_string()))
}

fn write_output(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Config(format!("stdout: {e}"))),
    }
}

fn emit(cli: &Cli, result: SweepResult) -> Result<(), Failure> {
    result.check_finite()?;
    let result = if cli.db { result.with_db() } else { result };
    match &cli.out {
        Some(path) => experiments::emit(&result, path)?,
        None => write_output(cli, &csv_string(&result.header(), &result.rows))?,
    }
    for (k, v) in &result.metadata.summary {
        eprintln!("{k} = {v:.6e}");
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load(cli)?;
    match cli.command {
        Command::Fig1a => emit(cli, experiments::run_fig1a(&cfg)?),
        Command::Fig1b => emit(cli, experiments::run_fig1b(&cfg)?),
        Command::Fig2 => emit(cli, experiments::run_fig2(&cfg)?),
        Command::Fig3 => emit(cli, experiments::run_fig3(&cfg)?),
        Command::Sweep => emit(cli, experiments::run_sweep(&cfg)?),
        Command::Validate => {
            let report = experiments::validate(&cfg, &ValidateOptions::default())?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            write_output(cli, &(json + "\n"))?;
            let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Validation(format!("failed checks: {}", failed.join(", "))))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_CONFIG);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("numerical error: {msg}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
