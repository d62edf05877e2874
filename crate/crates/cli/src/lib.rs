//! Argument handling for the `cvcoupler` binary.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use cvcoupler::scenario::config::{parse_config, parse_phases, ConfigFile};
use cvcoupler::scenario::{run_scenario, Overrides, RunReport, Scenario, ScenarioName};
use cvcoupler::{Error, Execution};

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "cvcoupler",
    version,
    about = "Quantum fluctuation and entanglement scenarios for a coupled χ(2) waveguide pair"
)]
struct Args {
    /// fig2, fig3, fig4a, fig4b, fig5 or custom
    #[arg(long)]
    scenario: Option<String>,
    /// Effective coupling κ (> 1)
    #[arg(long, value_parser = finite)]
    kappa: Option<f64>,
    /// Signal-to-pump input power ratio
    #[arg(long, value_parser = finite)]
    ratio: Option<f64>,
    /// Linear coupling C in mm^-1
    #[arg(long, value_parser = finite)]
    coupling: Option<f64>,
    /// Nonlinear constant g in mm^-1 mW^-1/2
    #[arg(long, value_parser = finite)]
    nonlinearity: Option<f64>,
    /// Propagation range in normalized units
    #[arg(long, value_parser = finite)]
    zeta_max: Option<f64>,
    /// Integration steps per unit ζ
    #[arg(long)]
    steps_per_unit: Option<usize>,
    /// Input phases θs,θp,φs,φp in radians
    #[arg(long, allow_hyphen_values = true)]
    phases: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses all cores, 1 runs sequentially
    #[arg(long)]
    jobs: Option<usize>,
    /// Config file of `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
}

fn finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Invocation {
    pub scenario: Scenario,
    pub jobs: usize,
}

#[derive(Debug)]
pub enum CliError {
    /// Help or version text; not an error.
    Info(String),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Resolves flags over config-file values over scenario defaults.
pub fn parse_invocation<I, T>(args: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(args).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;

    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| usage(e.context(path.display().to_string())))?
        }
        None => ConfigFile::default(),
    };

    let name = match &args.scenario {
        Some(s) => s.parse::<ScenarioName>().map_err(usage)?,
        None => file.scenario.unwrap_or(ScenarioName::Custom),
    };
    let phases = args
        .phases
        .as_deref()
        .map(parse_phases)
        .transpose()
        .map_err(usage)?;
    let flags = Overrides {
        kappa: args.kappa,
        ratio: args.ratio,
        coupling: args.coupling,
        nonlinearity: args.nonlinearity,
        zeta_max: args.zeta_max,
        steps_per_unit: args.steps_per_unit,
        phases,
    };
    let scenario = Scenario::new(name)
        .with_overrides(flags.or(file.overrides))
        .with_out_dir(args.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")));
    scenario.points().map_err(usage)?;
    Ok(Invocation {
        scenario,
        jobs: args.jobs.or(file.jobs).unwrap_or(0),
    })
}

pub fn run(inv: &Invocation) -> Result<RunReport, Error> {
    run_scenario(&inv.scenario, Execution::from_jobs(inv.jobs))
}

pub fn error_exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else if e.is_usage() {
        EXIT_USAGE
    } else {
        EXIT_IO
    }
}

/// Exit status for a completed run; failed sweep points count as failures.
pub fn report_exit_code(report: &RunReport) -> u8 {
    report
        .failures
        .iter()
        .map(|f| error_exit_code(&f.error))
        .max()
        .unwrap_or(EXIT_OK)
}
