//! Scenario-file front end for `fermi-lattice-core`.
//!
//! Each command reads one JSON scenario file, writes one or more CSV tables
//! and a `<out>.manifest.json` next to them.

pub mod commands;
pub mod error;
pub mod output;
pub mod schema;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};

pub use error::{CliError, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use output::{manifest_path, tagged_path, write_file, RunManifest};
use schema::ScenarioFile;

pub const THREADS_ENV: &str = "FERMI_LATTICE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Anticommutator/commutator functions and light-cone estimates.
    Causality,
    /// Bare second-order swap amplitude.
    Bare,
    /// Dressed amplitudes and static dressing tables.
    Dressed,
    /// Two-ion swap probability under strong pulses.
    Ion2,
    /// Site-resolved phonon cloud.
    Cloud,
    /// Perturbative amplitude against exact truncated-Fock evolution.
    OracleCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Causality => "causality",
            Command::Bare => "bare",
            Command::Dressed => "dressed",
            Command::Ion2 => "ion2",
            Command::Cloud => "cloud",
            Command::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fermi-lattice", version, about = "Fermi two-atom problem on harmonic chains and ion traps")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    /// Scenario file (JSON).
    #[arg(long)]
    pub scenario: PathBuf,

    /// Output CSV path; sweeps over sizes add a `_N<size>` suffix.
    #[arg(long)]
    pub out: PathBuf,

    /// Suppress the summary on stdout. Warnings still go to stderr.
    #[arg(long)]
    pub quiet: bool,
}

/// Thread cap from the environment, if any.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

pub fn execute(cli: &Cli) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let file = ScenarioFile::load(&cli.scenario)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    let out = pool.install(|| commands::run(cli.command, &file))?;

    let mut outputs = Vec::new();
    for (tag, table) in &out.tables {
        let path = tagged_path(&cli.out, tag.as_deref());
        write_file(&path, &table.to_csv())?;
        outputs.push(path.display().to_string());
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cli.command.name().into(),
        scenario_path: cli.scenario.display().to_string(),
        scenario_hash: file.hash(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs,
        summary: out.summary,
        warnings: out.warnings,
        notes: out.notes,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&manifest_path(&cli.out), &json)?;
    Ok(manifest)
}
