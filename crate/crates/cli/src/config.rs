//! Experiment configuration (JSON, `schema_version` 1).
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major lists of
//! rows.

use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use weakmeas_core::meters::{gaussian_grid_meter, qubit_meter};
use weakmeas_core::{
    EpsSchedule64, GridSpec64, MeterSpec64, Observable64, StateVector64, WeakSetup64,
};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    WeakValue,
    SweepRho,
    LimitCheck,
    Sample,
    Disturbance,
    AavGrid,
    Compare,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::WeakValue => "weak-value",
            Scenario::SweepRho => "sweep-rho",
            Scenario::LimitCheck => "limit-check",
            Scenario::Sample => "sample",
            Scenario::Disturbance => "disturbance",
            Scenario::AavGrid => "aav-grid",
            Scenario::Compare => "compare",
        }
    }

    /// Scenarios producing one row per parameter point default to CSV.
    pub fn default_format(&self) -> OutputFormat {
        match self {
            Scenario::SweepRho | Scenario::LimitCheck | Scenario::Disturbance => OutputFormat::Csv,
            _ => OutputFormat::Json,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Hermitian observable `A`, row-major.
    pub observable: Vec<Vec<Complex64>>,
    /// Preselected state `s` (normalized on load).
    pub pre: Vec<Complex64>,
    /// Postselected state `f` (normalized on load).
    pub post: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeterKind {
    Qubit,
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_points: usize,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_points: GridSpec64::DEFAULT_POINTS,
            half_width: GridSpec64::DEFAULT_HALF_WIDTH,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeterConfig {
    pub kind: MeterKind,
    pub rho: f64,
    /// Points of a `sweep-rho` run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_list: Option<Vec<f64>>,
    #[serde(default)]
    pub grid: GridConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsConfig {
    pub values: Vec<f64>,
    /// Richardson order; defaults to `values.len() - 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

impl Default for EpsConfig {
    fn default() -> Self {
        Self {
            values: EpsSchedule64::DEFAULT_EPS.to_vec(),
            order: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_trials: u64,
    pub seed: u64,
    /// Coupling strength used for sampling.
    pub eps: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_trials: 1_000_000,
            seed: 20_080_101,
            eps: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenario: Scenario,
    pub system: SystemConfig,
    pub meter: MeterConfig,
    #[serde(default)]
    pub eps: EpsConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// Parses and validates (schema version, Hermiticity, dimensions).
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.system_parts()?;
        self.schedule()?;
        if self.mc.n_trials == 0 {
            return Err(CliError::Usage("mc.n_trials must be at least 1".into()));
        }
        if !(self.mc.eps > 0.0) {
            return Err(CliError::Usage("mc.eps must be positive".into()));
        }
        Ok(())
    }

    pub fn system_parts(&self) -> Result<(Observable64, StateVector64, StateVector64), CliError> {
        let a = Observable64::from_rows(&self.system.observable)?;
        let s = StateVector64::new(self.system.pre.clone())?;
        let f = StateVector64::new(self.system.post.clone())?;
        if s.dim() != a.dim() || f.dim() != a.dim() {
            return Err(CliError::Usage(format!(
                "observable is {0}x{0} but states have dimensions {1} and {2}",
                a.dim(),
                s.dim(),
                f.dim()
            )));
        }
        Ok((a, s, f))
    }

    pub fn schedule(&self) -> Result<EpsSchedule64, CliError> {
        let order = self
            .eps
            .order
            .unwrap_or_else(|| self.eps.values.len().saturating_sub(1));
        Ok(EpsSchedule64::new(self.eps.values.clone(), order)?)
    }

    pub fn grid(&self) -> Result<GridSpec64, CliError> {
        Ok(GridSpec64::new(
            self.meter.grid.n_points,
            self.meter.grid.half_width,
        )?)
    }

    pub fn meter_at(&self, rho: f64) -> Result<MeterSpec64, CliError> {
        match self.meter.kind {
            MeterKind::Qubit => Ok(qubit_meter(rho)),
            MeterKind::Grid => Ok(gaussian_grid_meter(&self.grid()?, rho)?),
        }
    }

    pub fn setup_at(&self, rho: f64) -> Result<WeakSetup64, CliError> {
        let (a, s, f) = self.system_parts()?;
        Ok(WeakSetup64::new(a, s, f, self.meter_at(rho)?)?)
    }

    pub fn setup(&self) -> Result<WeakSetup64, CliError> {
        self.setup_at(self.meter.rho)
    }

    pub fn format(&self) -> OutputFormat {
        self.output
            .format
            .unwrap_or_else(|| self.scenario.default_format())
    }
}

pub(crate) fn complex_rows(rows: &[&[(f64, f64)]]) -> Vec<Vec<Complex64>> {
    rows.iter()
        .map(|r| r.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
        .collect()
}

pub(crate) fn complex_vec(v: &[(f64, f64)]) -> Vec<Complex64> {
    v.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn complex_is_encoded_as_pair() {
        let cfg = presets::preset("nonunique-rho50").unwrap();
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(
            json["system"]["pre"][1],
            serde_json::json!([0.0, std::f64::consts::FRAC_1_SQRT_2])
        );
        assert_eq!(json["scenario"], "sweep-rho");
        assert_eq!(json["schema_version"], 1);
    }

    #[test]
    fn rejects_bad_schema_and_non_hermitian() {
        let mut cfg = presets::preset("aav100").unwrap();
        cfg.schema_version = 2;
        assert!(matches!(cfg.validate(), Err(CliError::Usage(_))));
        let mut cfg = presets::preset("aav100").unwrap();
        cfg.system.observable =
            complex_rows(&[&[(0.0, 0.0), (1.0, 0.0)], &[(2.0, 0.0), (0.0, 0.0)]]);
        assert!(matches!(cfg.validate(), Err(CliError::Core(_))));
        let text = presets::preset("aav100")
            .unwrap()
            .to_json()
            .replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn defaults_fill_optional_sections() {
        let text = r#"{
            "schema_version": 1,
            "scenario": "weak-value",
            "system": {
                "observable": [[[0,0],[1,0]],[[1,0],[0,0]]],
                "pre": [[1,0],[0,1]],
                "post": [[1,0],[0,0]]
            },
            "meter": {"kind": "qubit", "rho": 50}
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.eps, EpsConfig::default());
        assert_eq!(cfg.meter.grid, GridConfig::default());
        assert_eq!(cfg.format(), OutputFormat::Json);
        assert_eq!(cfg.schedule().unwrap().order(), 4);
    }
}
