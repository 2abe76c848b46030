//! Experiment runner for weak measurement scenarios: configuration,
//! scenario execution and result persistence behind the `weakmeas` binary.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod presets;
pub mod scenarios;

use std::fs;
use std::path::PathBuf;

use clap::Parser;

pub use config::{ExperimentConfig, OutputFormat, Scenario};
pub use output::Report;
pub use scenarios::ResultRow;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] weakmeas_core::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Command line of the `weakmeas` binary.
#[derive(Debug, Clone, Parser)]
#[command(name = "weakmeas", version, about = "Run weak measurement experiments")]
pub struct Cli {
    /// Scenario to run; overrides the scenario stored in the config.
    #[arg(value_enum)]
    pub scenario: Scenario,
    /// JSON experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration: aav100, nonunique-rho50, convexity-contrast, aav-grid.
    #[arg(long)]
    pub preset: Option<String>,
    /// Meter parameter; a comma-separated list for sweep-rho.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub rho: Option<Vec<f64>>,
    /// Coupling strengths, strictly descending (one value for sample).
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Richardson order (defaults to the full table).
    #[arg(long)]
    pub order: Option<usize>,
    /// Monte Carlo trials.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; `<out>.config.json` is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format (CSV for sweeps, JSON otherwise by default).
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

/// Preset used when neither `--config` nor `--preset` is given.
pub fn default_preset(scenario: Scenario) -> &'static str {
    match scenario {
        Scenario::WeakValue => "aav100",
        Scenario::SweepRho => "nonunique-rho50",
        Scenario::AavGrid => "aav-grid",
        _ => "convexity-contrast",
    }
}

/// Loads the base configuration and applies command-line overrides.
pub fn effective_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => ExperimentConfig::from_json(&fs::read_to_string(path)?)?,
        (None, name) => {
            let name = name.as_deref().unwrap_or(default_preset(cli.scenario));
            presets::preset(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown preset {name:?} (available: {})",
                    presets::NAMES.join(", ")
                ))
            })?
        }
    };
    cfg.scenario = cli.scenario;
    if let Some(rhos) = &cli.rho {
        if cli.scenario == Scenario::SweepRho {
            cfg.meter.rho_list = Some(rhos.clone());
        } else {
            match rhos.as_slice() {
                [r] => cfg.meter.rho = *r,
                _ => {
                    return Err(CliError::Usage(
                        "--rho takes a single value outside sweep-rho".into(),
                    ))
                }
            }
        }
    }
    if let Some(eps) = &cli.eps {
        if cli.scenario == Scenario::Sample {
            match eps.as_slice() {
                [e] => cfg.mc.eps = *e,
                _ => return Err(CliError::Usage("sample takes a single --eps".into())),
            }
        } else {
            cfg.eps.values = eps.clone();
            cfg.eps.order = None;
        }
    }
    if let Some(order) = cli.order {
        cfg.eps.order = Some(order);
    }
    if let Some(n) = cli.trials {
        cfg.mc.n_trials = n;
    }
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(format) = cli.format {
        cfg.output.format = Some(format);
    }
    if cli.scenario == Scenario::LimitCheck && cfg.eps.values.len() < 2 {
        return Err(CliError::Usage(
            "limit-check needs at least two eps values".into(),
        ));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a configuration and packages the result.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let started = output::now_unix_ms();
    let rows = scenarios::run(cfg)?;
    Ok(output::new_report(cfg, rows, started))
}

/// Executes a parsed command line. Returns the text destined for stdout.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let cfg = effective_config(cli)?;
    if cli.print_config {
        return Ok(cfg.to_json() + "\n");
    }
    let report = run_config(&cfg)?;
    let format = cfg.format();
    match &cfg.output.path {
        Some(out) => {
            let sidecar = output::persist(&report, out, format)?;
            Ok(format!(
                "wrote {} rows to {} (config: {})\n",
                report.rows.len(),
                out.display(),
                sidecar.display()
            ))
        }
        None => output::render(&report, format),
    }
}
