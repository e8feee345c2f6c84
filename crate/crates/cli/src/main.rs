use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Parser, ValueEnum};

mod commands;
mod config;
mod verify;

use commands::Report;
use config::{Config, ConfigError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    Simulate,
    Moments,
    Enumerate,
    Rate,
    Percolation,
    Constants,
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Moments => "moments",
            Command::Enumerate => "enumerate",
            Command::Rate => "rate",
            Command::Percolation => "percolation",
            Command::Constants => "constants",
            Command::Verify => "verify",
        }
    }
}

/// Experiments on step-reinforced random walks, driven by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "reinforced-walks", version)]
struct Cli {
    command: Command,

    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,

    /// CSV destination; defaults to the config's `output` key, then stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for replicate-parallel sampling
    #[arg(long, env = "REINFORCED_WALKS_THREADS")]
    threads: Option<usize>,
}

enum Failure {
    Usage(anyhow::Error),
    Check(Vec<String>),
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = Config::from_path(&cli.config).map_err(|e| Failure::Usage(e.into()))?;
    if let Some(named) = cfg.string("command").map_err(|e| Failure::Usage(e.into()))? {
        if named != cli.command.name() {
            let e = ConfigError::new("command", format!("`{named}` does not match `{}`", cli.command.name()));
            return Err(Failure::Usage(e.into()));
        }
    }
    let out = match &cli.out {
        Some(p) => Some(p.clone()),
        None => cfg
            .string("output")
            .map_err(|e| Failure::Usage(e.into()))?
            .map(PathBuf::from),
    };
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Usage(anyhow::anyhow!("--threads: {e}")))?;
    }

    let report = match cli.command {
        Command::Simulate => commands::simulate_cmd(&cfg),
        Command::Moments => commands::moments_cmd(&cfg),
        Command::Enumerate => commands::enumerate_cmd(&cfg),
        Command::Rate => commands::rate_cmd(&cfg),
        Command::Percolation => commands::percolation_cmd(&cfg),
        Command::Constants => commands::constants_cmd(&cfg),
        Command::Verify => commands::verify_cmd(&cfg),
    }
    .map_err(Failure::Usage)?;
    write_report(cli.command, &report, out.as_ref()).map_err(Failure::Usage)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(report.failures))
    }
}

fn write_report(command: Command, report: &Report, out: Option<&PathBuf>) -> anyhow::Result<()> {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let text = format!(
        "# reinforced-walks {} {} generated_unix={stamp}\n{}",
        env!("CARGO_PKG_VERSION"),
        command.name(),
        report.body
    );
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(failures)) => {
            for f in failures {
                eprintln!("check failed: {f}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
