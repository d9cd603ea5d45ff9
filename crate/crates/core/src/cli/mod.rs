//! Batch front end: `radtrap <mode> --config <path> [--set key=value ...] --out <dir>`.
//!
//! Every run writes one or more CSV tables plus `manifest.json`, which holds
//! the fully resolved scenario. Feeding the manifest back as `--config`
//! reproduces the tables byte for byte.
//!
//! Exit codes: 0 success, 2 configuration or output-path error, 3 numerical
//! failure (after writing whatever could be computed).

mod config;
mod modes;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

pub use config::{
    apply_override, parse_scenario, read_document, AsymptoteSettings, EvolveSettings, GridSpacing, OracleSettings,
    Preset, Scenario, SpectrumSettings, SweepSettings, DEFAULT_GAMMA0_LIST,
};
pub use output::{fmt, read_table, schema, Manifest, Table, TableContents, MANIFEST_FILE};

use crate::error::Error;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "RADTRAP_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Time evolution per density parameter.
    Evolve,
    /// Trapped and absorption spectra at the stationary state.
    Spectrum,
    /// Stationary states over a density grid and γ0 series.
    Sweep,
    /// Simulated pump-rate plateau versus the closed-form asymptote.
    Asymptote,
    /// Stochastic Bloch ensemble versus the rate equations.
    Oracle,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Evolve => "evolve",
            Mode::Spectrum => "spectrum",
            Mode::Sweep => "sweep",
            Mode::Asymptote => "asymptote",
            Mode::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Output(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub(crate) fn from_core(err: Error) -> Self {
        match err {
            Error::InvalidParameter { .. } => CliError::Config(err.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }

    /// Numerical error naming the parameters it occurred at.
    pub(crate) fn at(context: impl std::fmt::Display, err: Error) -> Self {
        match CliError::from_core(err) {
            CliError::Numerical(m) => CliError::Numerical(format!("{context}: {m}")),
            other => other,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "radtrap", version, about = "Optical pumping with radiation trapping")]
pub struct Args {
    pub mode: Mode,
    /// Scenario JSON (or a manifest from an earlier run).
    #[arg(long, value_name = "PATH", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in scenario, used instead of --config.
    #[arg(long, value_enum, conflicts_with = "config")]
    pub preset: Option<Preset>,
    /// Override a scenario field, e.g. `--set params.pump_rate=20`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

/// Builds the resolved scenario described by the arguments.
pub fn load_scenario(args: &Args) -> Result<Scenario, CliError> {
    let mut doc = match (&args.config, args.preset) {
        (Some(path), _) => read_document(path)?,
        (None, Some(p)) => serde_json::to_value(Scenario::preset(p)).expect("preset serializes"),
        (None, None) => return Err(CliError::Config("either --config or --preset is required".into())),
    };
    for assignment in &args.overrides {
        apply_override(&mut doc, assignment)?;
    }
    if !doc.is_object() {
        return Err(CliError::Config("scenario must be a JSON object".into()));
    }
    let scenario = parse_scenario(doc)?;
    if let Some(m) = scenario.mode {
        if m != args.mode {
            return Err(CliError::Config(format!(
                "scenario is for mode `{}` but `{}` was requested",
                m.name(),
                args.mode.name()
            )));
        }
    }
    let scenario = scenario.resolved(args.mode);
    scenario.validate()?;
    Ok(scenario)
}

/// Caps the global worker pool at `RADTRAP_THREADS` if set. Returns the
/// number of threads in use.
pub fn configure_threads() -> Result<usize, CliError> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
        // A pool that already exists (e.g. in tests) is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

/// Runs a resolved scenario and writes its tables and manifest into `out`.
///
/// On a numerical failure the tables computed so far and the manifest are
/// still written before the error is returned.
pub fn execute(mode: Mode, scenario: &Scenario, out: &Path) -> Result<Manifest, CliError> {
    let start = Instant::now();
    std::fs::create_dir_all(out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;
    let (tables, failure) = modes::run(mode, scenario);
    for t in &tables {
        t.write(out)?;
    }
    let manifest = Manifest {
        tool: "radtrap".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mode,
        config: serde_json::to_value(scenario).expect("scenario serializes"),
        outputs: tables.iter().map(|t| t.file_name.clone()).collect(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    };
    manifest.write(out)?;
    match failure {
        Some(err) => Err(err),
        None => Ok(manifest),
    }
}

pub fn run(args: &Args) -> Result<Manifest, CliError> {
    configure_threads()?;
    let scenario = load_scenario(args)?;
    execute(args.mode, &scenario, &args.out)
}

/// Parses `argv`, runs, reports errors on stderr and returns the exit code.
pub fn main_entry<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&args) {
        Ok(manifest) => {
            log::info!(
                "{} finished in {:.2} s: {}",
                manifest.mode.name(),
                manifest.wall_clock_seconds,
                manifest.outputs.join(", ")
            );
            0
        }
        Err(e) => {
            eprintln!("radtrap: {e}");
            e.exit_code()
        }
    }
}
