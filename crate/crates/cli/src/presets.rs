//! Built-in configurations.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::config::*;

pub const NAMES: [&str; 4] = [
    "aav100",
    "nonunique-rho50",
    "convexity-contrast",
    "aav-grid",
];

/// `sigma_z`, `s = (1,1)/sqrt2`, `f ~ (1, -1 + 2/101)`: the traditional weak
/// value is exactly 100 while every eigenvalue lies in `[-1, 1]`.
fn aav100() -> ExperimentConfig {
    let delta = 2.0 / 101.0;
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        scenario: Scenario::WeakValue,
        system: SystemConfig {
            observable: complex_rows(&[&[(1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (-1.0, 0.0)]]),
            pre: complex_vec(&[(FRAC_1_SQRT_2, 0.0), (FRAC_1_SQRT_2, 0.0)]),
            post: complex_vec(&[(1.0, 0.0), (-1.0 + delta, 0.0)]),
        },
        meter: MeterConfig {
            kind: MeterKind::Qubit,
            rho: 0.0,
            rho_list: None,
            grid: GridConfig::default(),
        },
        eps: EpsConfig::default(),
        mc: McConfig::default(),
        output: OutputConfig::default(),
    }
}

/// `sigma_x`, `s = (1,i)/sqrt2`, `f = e1`: `<f,As>/<f,s> = i`, so the weak
/// value is `2 rho`.
fn canonical(scenario: Scenario, rho: f64, rho_list: Option<Vec<f64>>) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        scenario,
        system: SystemConfig {
            observable: complex_rows(&[&[(0.0, 0.0), (1.0, 0.0)], &[(1.0, 0.0), (0.0, 0.0)]]),
            pre: complex_vec(&[(FRAC_1_SQRT_2, 0.0), (0.0, FRAC_1_SQRT_2)]),
            post: complex_vec(&[(1.0, 0.0), (0.0, 0.0)]),
        },
        meter: MeterConfig {
            kind: MeterKind::Qubit,
            rho,
            rho_list,
            grid: GridConfig::default(),
        },
        eps: EpsConfig::default(),
        mc: McConfig::default(),
        output: OutputConfig::default(),
    }
}

/// Qubit system read out by the Gaussian grid meter at `rho = 3`, with a
/// postselection whose complex ratio has both parts nonzero.
fn aav_grid() -> ExperimentConfig {
    let mut cfg = canonical(Scenario::AavGrid, 3.0, None);
    cfg.system.post = complex_vec(&[(1.0, 0.0), (0.3, 0.0)]);
    cfg.meter.kind = MeterKind::Grid;
    cfg
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    match name {
        "aav100" => Some(aav100()),
        "nonunique-rho50" => Some(canonical(
            Scenario::SweepRho,
            50.0,
            Some(vec![-50.0, 0.0, 50.0]),
        )),
        "convexity-contrast" => Some(canonical(Scenario::Compare, 50.0, None)),
        "aav-grid" => Some(aav_grid()),
        _ => None,
    }
}
