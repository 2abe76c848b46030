//! Report assembly and persistence.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OutputFormat, SCHEMA_VERSION};
use crate::scenarios::ResultRow;
use crate::CliError;

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 14] = [
    "scenario",
    "rho",
    "eps",
    "wv_numeric",
    "wv_closed",
    "wv_traditional",
    "wv_aav_re",
    "wv_aav_im",
    "projective_cond",
    "mc_mean",
    "mc_stderr",
    "mc_n_success",
    "disturbance",
    "status",
];

/// A complete run: the effective configuration, its rows and timing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub scenario: String,
    /// Milliseconds since the Unix epoch at which the run started.
    pub started_unix_ms: u128,
    /// Milliseconds since the Unix epoch at which the run finished.
    pub finished_unix_ms: u128,
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
}

pub fn now_unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

/// CSV mirror of [`ResultRow`] without the `extra` map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CsvRecord {
    scenario: String,
    rho: Option<f64>,
    eps: Option<f64>,
    wv_numeric: Option<f64>,
    wv_closed: Option<f64>,
    wv_traditional: Option<f64>,
    wv_aav_re: Option<f64>,
    wv_aav_im: Option<f64>,
    projective_cond: Option<f64>,
    mc_mean: Option<f64>,
    mc_stderr: Option<f64>,
    mc_n_success: Option<u64>,
    disturbance: Option<f64>,
    status: String,
}

impl From<&ResultRow> for CsvRecord {
    fn from(r: &ResultRow) -> Self {
        Self {
            scenario: r.scenario.clone(),
            rho: r.rho,
            eps: r.eps,
            wv_numeric: r.wv_numeric,
            wv_closed: r.wv_closed,
            wv_traditional: r.wv_traditional,
            wv_aav_re: r.wv_aav_re,
            wv_aav_im: r.wv_aav_im,
            projective_cond: r.projective_cond,
            mc_mean: r.mc_mean,
            mc_stderr: r.mc_stderr,
            mc_n_success: r.mc_n_success,
            disturbance: r.disturbance,
            status: r.status.clone(),
        }
    }
}

impl From<CsvRecord> for ResultRow {
    fn from(r: CsvRecord) -> Self {
        Self {
            scenario: r.scenario,
            rho: r.rho,
            eps: r.eps,
            wv_numeric: r.wv_numeric,
            wv_closed: r.wv_closed,
            wv_traditional: r.wv_traditional,
            wv_aav_re: r.wv_aav_re,
            wv_aav_im: r.wv_aav_im,
            projective_cond: r.projective_cond,
            mc_mean: r.mc_mean,
            mc_stderr: r.mc_stderr,
            mc_n_success: r.mc_n_success,
            disturbance: r.disturbance,
            status: r.status,
            extra: Default::default(),
        }
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.serialize(CsvRecord::from(row))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv`]; `extra` comes back empty.
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(CliError::Usage(format!(
            "unexpected CSV header in {}",
            path.display()
        )));
    }
    r.deserialize::<CsvRecord>()
        .map(|rec| Ok(rec?.into()))
        .collect()
}

pub fn render(report: &Report, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            write_csv(&report.rows, &mut buf)?;
            Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
        }
    }
}

/// Path of the configuration written next to an output file.
pub fn config_sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

/// Writes the report to `out` and the effective config to its sidecar.
pub fn persist(report: &Report, out: &Path, format: OutputFormat) -> Result<PathBuf, CliError> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(out, render(report, format)?)?;
    let sidecar = config_sidecar(out);
    fs::write(&sidecar, report.config.to_json() + "\n")?;
    Ok(sidecar)
}

pub fn new_report(
    config: &ExperimentConfig,
    rows: Vec<ResultRow>,
    started_unix_ms: u128,
) -> Report {
    Report {
        schema_version: SCHEMA_VERSION,
        scenario: config.scenario.as_str().to_string(),
        started_unix_ms,
        finished_unix_ms: now_unix_ms(),
        config: config.clone(),
        rows,
    }
}
