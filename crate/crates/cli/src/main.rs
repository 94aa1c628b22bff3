//! `photon-capture`: derive impedance-matching control pulses and simulate
//! single-photon absorption from a TOML run configuration.

mod commands;
mod config;
mod io;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{}: {0}", .0.name())]
    Domain(#[from] photon_capture::Error),
    #[error("internal error: {0:#}")]
    Internal(#[from] anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Invalid(_) | Self::Domain(_) => 2,
            Self::Internal(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "photon-capture", version, about)]
struct Cli {
    /// TOML run configuration. Omitted keys default to g, κ, γ = 2π × (15, 3, 3)
    /// MHz, ρ₀ = 0.005 and a 3.14 μs sin² photon.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file; standard output if absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override `[grid] n_steps`.
    #[arg(long, global = true, value_name = "N")]
    steps: Option<usize>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the control pulse for the configured photon (CSV).
    Derive,
    /// Integrate the dynamics and write the trajectory (CSV) and report (JSON).
    Simulate {
        /// Send the photon into the cavity with no atom.
        #[arg(long)]
        empty_cavity: bool,
        /// Use a pulse CSV from `derive` instead of deriving one.
        #[arg(long, value_name = "PATH")]
        pulse: Option<PathBuf>,
        /// Report path; defaults to `<out>.report.json`, or stderr when
        /// writing to standard output.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Sweep rho0 or cooperativity and write a long-format CSV.
    Sweep,
    /// Map a time-bin qubit onto two spin states and write a JSON summary.
    Timebin,
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()).into())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(n) = cli.steps {
        if n < 2 {
            return Err(CliError::Invalid(format!("--steps must be >= 2, got {n}")));
        }
        cfg.n_steps = n;
    }
    let out = match &cli.command {
        Command::Derive => commands::derive(&cfg)?,
        Command::Simulate {
            empty_cavity,
            pulse,
            ..
        } => commands::simulate_cmd(&cfg, *empty_cavity, pulse.as_deref())?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::Timebin => commands::timebin(&cfg)?,
    };

    match &cli.out {
        Some(path) => write_file(path, &out.main)?,
        None => std::io::stdout()
            .write_all(out.main.as_bytes())
            .map_err(anyhow::Error::from)?,
    }
    if let Some(report) = &out.report {
        let explicit = match &cli.command {
            Command::Simulate { report, .. } => report.clone(),
            _ => None,
        };
        match explicit.or_else(|| cli.out.as_ref().map(|p| p.with_extension("report.json"))) {
            Some(path) => write_file(&path, report)?,
            None => eprint!("{report}"),
        }
    }
    for (path, text) in &out.files {
        write_file(path, text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.jobs {
        Some(0) => Err(CliError::Invalid("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(anyhow::Error::from(e).into()),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
