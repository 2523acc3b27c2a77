//! Command-line front end.
//!
//! Every command writes to a caller-supplied sink so the binary and the tests
//! share one code path. Floats are printed in shortest round-trip form, so
//! identical inputs give byte-identical output.
//!
//! Exit codes: `0` success, `2` invalid configuration or usage, `3` numerical
//! failure (non-convergence, no interior optimum, degenerate fit).

mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::presets::PresetName;
use crate::Error;

pub use commands::{
    FREQ_SWEEP_HEADER, LOAD_SWEEP_HEADER, VM_ANALYTIC_HEADER, VM_SIM_SUMMARY_KEYS,
};
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::DegenerateFit | Error::NoInteriorOptimum { .. } => {
                CliError::Numerical(e.to_string())
            }
            Error::InvalidParameter { .. } | Error::NonPhysicalOptimum { .. } | Error::EmptyGrid(_) => {
                CliError::Config(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "emharvest", version, about = "Electromagnetic vibration harvester and voltage multiplier models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resonance, matched power, optimum load and open-circuit EMF.
    GenInfo {
        #[command(flatten)]
        source: Source,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Displacement and open-circuit EMF over a linear frequency grid.
    FreqSweep {
        #[command(flatten)]
        source: Source,
        /// Hz
        #[arg(long)]
        fmin: f64,
        /// Hz
        #[arg(long)]
        fmax: f64,
        #[arg(long, default_value_t = 81)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupled operating points over a log-spaced load grid.
    LoadSweep {
        #[command(flatten)]
        source: Source,
        /// Insert the multiplier (the config's `vm` section, else the prototype).
        #[arg(long)]
        vm: bool,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form multiplier output over a load grid.
    VmAnalytic {
        /// Optional config; its `vm` and `sweep` sections supply defaults.
        config: Option<PathBuf>,
        #[arg(long)]
        stages: Option<u32>,
        /// Stage capacitance, F.
        #[arg(long)]
        capacitance: Option<f64>,
        /// Hz
        #[arg(long, default_value_t = 50.0)]
        frequency: f64,
        /// Peak input, V.
        #[arg(long, default_value_t = 0.58)]
        vi: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time-domain multiplier simulation; prints a JSON summary.
    VmSim {
        config: Option<PathBuf>,
        /// Write the waveform CSV here (overrides `output.waveform_csv`).
        #[arg(long)]
        waveform: Option<PathBuf>,
    },
    /// Built-in presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    /// Print a config document that reproduces the preset.
    Dump { name: PresetName },
}

#[derive(Debug, Args)]
pub struct Source {
    /// JSON run configuration.
    pub config: Option<PathBuf>,
    /// Use a built-in generator instead of the config's `generator` section.
    #[arg(long)]
    pub preset: Option<PresetName>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Smallest load, Ω.
    #[arg(long)]
    pub min: Option<f64>,
    /// Largest load, Ω.
    #[arg(long)]
    pub max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

/// Runs one parsed command, writing its primary output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    commands::dispatch(&cli.command, out)
}
