//! Command-line front end shared by the binary and the acceptance checks.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::output::{write_outputs, Provenance};
use super::{execute, sweep, CliError, Overrides, Plan, Preset, RunConfig};
use crate::constants::two_pi;

#[derive(Parser)]
#[command(name = "mwgate", version, about = "Microwave two-qubit gate simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run a configuration, or a named preset on top of it.
    Run {
        #[command(flatten)]
        common: Common,
        /// fig1a, fig1b, fig1c or fig3
        #[arg(long)]
        preset: Option<String>,
    },
    /// Vary one configuration entry and write one row per value.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted path into the configuration, e.g. schedule.carrier_hz
        #[arg(long)]
        param: String,
        /// a,b,c | start:stop:count | grid:lo_hz:hi_hz
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
}

#[derive(Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (defaults to output.dir of the config)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Large ensembles (100 realizations)
    #[arg(long)]
    pub full: bool,
    /// Truncate the modes at 10/3 Fock states instead of the configured sizes
    #[arg(long)]
    pub fast: bool,
}

impl Common {
    pub fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, realizations: self.realizations, full: self.full, fast: self.fast }
    }
}

fn echo(config: &RunConfig) {
    let c = config;
    eprintln!(
        "trap ν = 2π·{:.4} kHz ({:.6e} rad/s), Ω = 2π·{:.4} kHz ({:.6e} rad/s), Ω_DD = 2π·{:.4} kHz ({:.6e} rad/s)",
        c.physical.trap_frequency_hz / 1e3,
        two_pi(c.physical.trap_frequency_hz),
        c.schedule.rabi_hz / 1e3,
        two_pi(c.schedule.rabi_hz),
        c.schedule.carrier_hz / 1e3,
        two_pi(c.schedule.carrier_hz),
    );
}

/// Executes a parsed command line; returns the written files.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let (common, preset, param, values) = match &cli.command {
        Command::Run { common, preset } => (common, preset.as_deref(), None, None),
        Command::Sweep { common, param, values } => (common, None, Some(param.as_str()), Some(values.as_str())),
    };
    let config = RunConfig::load(&common.config)?;
    echo(&config);
    let overrides = common.overrides();
    let mut plan = match (preset, param, values) {
        (Some(name), _, _) => name.parse::<Preset>()?.plan(&config)?,
        (None, Some(path), Some(values)) => {
            let mut base = config.clone();
            overrides.apply(&mut base);
            let v = sweep::parse_values(values, &base)?;
            sweep::plan(&config, path, &v)?
        }
        _ => {
            let value = config.schedule.carrier_hz;
            Plan::single("run", value, config.clone())
        }
    };
    plan.apply(&overrides);
    let result = execute(&plan)?;
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let prov = Provenance {
        command: if param.is_some() { "sweep" } else { "run" },
        preset,
        parameter: param,
        config: &config,
        overrides: &overrides,
    };
    let files = write_outputs(&dir, &result, &prov)?;
    for s in &result.series {
        for p in &s.points {
            eprintln!(
                "{:<28} value {:>12} F = {:.6} ± {:.1e} (n = {})",
                if s.name.is_empty() { "run" } else { s.name.as_str() },
                p.value,
                p.mean_fidelity,
                p.stderr,
                p.n_realizations
            );
        }
    }
    Ok(files)
}
