//! Scenario runners. Each returns the rows it would persist.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use weakmeas_core::hilbert::expectation;
use weakmeas_core::meters::{chirp_equivalence_residual, qubit_meter};
use weakmeas_core::oracle::{
    monte_carlo_conditional_mean, monte_carlo_meter_mean, projective_a_oracle, sampler_consistency,
};
use weakmeas_core::protocol::{
    aav_complex_weak_value, conditional_expectation, disturbance, empirical_orders,
    postselection_probability, projective_conditional_expectation, unconditional_limit,
    weak_value_closed_form, weak_value_numeric, weak_value_report,
};
use weakmeas_core::{Error as CoreError, WeakSetup64};

use crate::config::{ExperimentConfig, Scenario};
use crate::CliError;

/// Status of a row whose postselected quantities do not exist.
pub const UNDEFINED: &str = "undefined (<f,s> ~ 0)";
pub const OK: &str = "ok";

/// One output record. The named columns are the CSV schema; `extra` holds
/// scenario-specific diagnostics and only appears in JSON.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub rho: Option<f64>,
    pub eps: Option<f64>,
    pub wv_numeric: Option<f64>,
    pub wv_closed: Option<f64>,
    pub wv_traditional: Option<f64>,
    pub wv_aav_re: Option<f64>,
    pub wv_aav_im: Option<f64>,
    pub projective_cond: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub mc_n_success: Option<u64>,
    pub disturbance: Option<f64>,
    pub status: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl ResultRow {
    fn new(scenario: Scenario, rho: Option<f64>, eps: Option<f64>) -> Self {
        Self {
            scenario: scenario.as_str().to_string(),
            rho,
            eps,
            status: OK.to_string(),
            ..Default::default()
        }
    }

    fn put(&mut self, key: &str, value: f64) {
        self.extra.insert(key.to_string(), value);
    }

    /// Like [`put`](Self::put) but silently skips undefined values, e.g.
    /// a convergence order when the error is exactly zero.
    fn put_if_finite(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.put(key, value);
        }
    }

    fn flag_status(&mut self, note: &str) {
        if self.status == OK {
            self.status = note.to_string();
        } else if !self.status.contains(note) {
            self.status = format!("{}; {note}", self.status);
        }
    }

    /// Replaces non-finite numbers by `None` and says so in `status`, so
    /// every numeric field is either finite or explicitly absent.
    fn finalize(mut self) -> Self {
        let mut bad = Vec::new();
        for (name, slot) in [
            ("rho", &mut self.rho),
            ("eps", &mut self.eps),
            ("wv_numeric", &mut self.wv_numeric),
            ("wv_closed", &mut self.wv_closed),
            ("wv_traditional", &mut self.wv_traditional),
            ("wv_aav_re", &mut self.wv_aav_re),
            ("wv_aav_im", &mut self.wv_aav_im),
            ("projective_cond", &mut self.projective_cond),
            ("mc_mean", &mut self.mc_mean),
            ("mc_stderr", &mut self.mc_stderr),
            ("disturbance", &mut self.disturbance),
        ] {
            if slot.is_some_and(|v| !v.is_finite()) {
                *slot = None;
                bad.push(name.to_string());
            }
        }
        self.extra.retain(|k, v| {
            let keep = v.is_finite();
            if !keep {
                bad.push(k.clone());
            }
            keep
        });
        if !bad.is_empty() {
            self.flag_status(&format!("non-finite: {}", bad.join(",")));
        }
        self
    }
}

fn is_orthogonal(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::OrthogonalSelection { .. } | CoreError::EmptyPostselection { .. }
    )
}

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    cfg.validate()?;
    let rows = match cfg.scenario {
        Scenario::WeakValue => vec![run_weak_value(cfg)?],
        Scenario::SweepRho => run_sweep_rho(cfg)?,
        Scenario::LimitCheck => run_limit_check(cfg)?,
        Scenario::Sample => vec![run_sample(cfg)?],
        Scenario::Disturbance => run_disturbance(cfg)?,
        Scenario::AavGrid => vec![run_aav_grid(cfg)?],
        Scenario::Compare => vec![run_compare(cfg)?],
    };
    Ok(rows)
}

/// Numeric, closed-form, traditional, complex and projective values side
/// by side for one `rho`.
fn weak_value_row(
    cfg: &ExperimentConfig,
    scenario: Scenario,
    setup: &WeakSetup64,
    rho: f64,
) -> Result<ResultRow, CliError> {
    let sched = cfg.schedule()?;
    let mut row = ResultRow::new(scenario, Some(rho), None);
    let (a, s, f) = (&setup.observable, &setup.pre, &setup.post);
    row.put("expectation", expectation(a, s)?);
    row.put("rho_effective", setup.meter.rho());
    match weak_value_report(setup, &sched) {
        Ok(rep) => {
            row.wv_numeric = Some(rep.numeric.value);
            row.wv_closed = Some(rep.closed_form);
            row.wv_traditional = Some(rep.traditional);
            row.wv_aav_re = Some(rep.aav_complex.re);
            row.wv_aav_im = Some(rep.aav_complex.im);
            row.projective_cond = Some(rep.projective_conditional);
            row.put("error_estimate", rep.numeric.error_estimate);
            row.put("discrepancy", rep.discrepancy());
            if !rep.numeric.converged {
                row.flag_status("extrapolation not converged");
            }
        }
        Err(e) if is_orthogonal(&e) => {
            row.status = UNDEFINED.to_string();
            row.projective_cond = projective_conditional_expectation(a, s, f).ok();
        }
        Err(e) => return Err(e.into()),
    }
    Ok(row.finalize())
}

pub fn run_weak_value(cfg: &ExperimentConfig) -> Result<ResultRow, CliError> {
    let setup = cfg.setup()?;
    weak_value_row(cfg, Scenario::WeakValue, &setup, cfg.meter.rho)
}

/// Least-squares slope of `ys` against `xs`.
pub fn fitted_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn run_sweep_rho(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    let mut rhos = cfg.meter.rho_list.clone().unwrap_or_default();
    if rhos.is_empty() {
        return Err(CliError::Usage(
            "sweep-rho needs a non-empty rho list".into(),
        ));
    }
    if rhos.iter().any(|r| !r.is_finite()) {
        return Err(CliError::Usage("rho values must be finite".into()));
    }
    rhos.sort_by(f64::total_cmp);
    let mut rows: Vec<ResultRow> = rhos
        .par_iter()
        .map(|&rho| {
            let setup = cfg.setup_at(rho)?;
            weak_value_row(cfg, Scenario::SweepRho, &setup, rho)
        })
        .collect::<Result<_, _>>()?;

    let (a, s, f) = cfg.system_parts()?;
    let ratio = aav_complex_weak_value(&a, &s, &f);
    let defined: Vec<&ResultRow> = rows.iter().filter(|r| r.wv_closed.is_some()).collect();
    let xs: Vec<f64> = defined.iter().map(|r| r.rho.unwrap()).collect();
    let closed: Vec<f64> = defined.iter().map(|r| r.wv_closed.unwrap()).collect();
    let numeric: Vec<f64> = defined.iter().map(|r| r.wv_numeric.unwrap()).collect();
    let slope_closed = fitted_slope(&xs, &closed);
    let slope_numeric = fitted_slope(&xs, &numeric);
    for row in &mut rows {
        if let Ok(w) = ratio {
            row.put("expected_slope", 2.0 * w.im);
            if let Some(sc) = slope_closed {
                row.put("slope_closed", sc);
                row.put("slope_error", (sc - 2.0 * w.im).abs());
            }
        }
        if let Some(sn) = slope_numeric {
            row.put("slope_numeric", sn);
        }
    }
    Ok(rows)
}

pub fn run_limit_check(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    if cfg.eps.values.len() < 2 {
        return Err(CliError::Usage(
            "limit-check needs at least two eps values".into(),
        ));
    }
    let sched = cfg.schedule()?;
    let setup = cfg.setup()?;
    let rho = cfg.meter.rho;
    let target = expectation(&setup.observable, &setup.pre)?;
    let uncond = unconditional_limit(&setup, &sched)?;
    let uncond_orders = empirical_orders(&uncond.samples, target);
    let cond = match weak_value_numeric(&setup, &sched) {
        Ok(x) => Some(x),
        Err(e) if is_orthogonal(&e) => None,
        Err(e) => return Err(e.into()),
    };
    let closed = weak_value_closed_form(&setup).ok();
    let cond_orders = match (&cond, closed) {
        (Some(c), Some(w)) => Some(empirical_orders(&c.samples, w)),
        _ => None,
    };

    let mut rows = Vec::with_capacity(uncond.samples.len() + 1);
    for (i, &(eps, reading)) in uncond.samples.iter().enumerate() {
        let mut row = ResultRow::new(Scenario::LimitCheck, Some(rho), Some(eps));
        row.put("meter_reading", reading);
        row.put("meter_reading_error", (reading - target).abs());
        if i > 0 {
            row.put_if_finite("order_unconditional", uncond_orders[i - 1]);
        }
        match &cond {
            Some(c) => {
                row.wv_numeric = Some(c.samples[i].1);
                if let (Some(orders), true) = (&cond_orders, i > 0) {
                    row.put_if_finite("order_conditional", orders[i - 1]);
                }
            }
            None => row.status = UNDEFINED.to_string(),
        }
        row.wv_closed = closed;
        rows.push(row.finalize());
    }

    let mut summary = ResultRow::new(Scenario::LimitCheck, Some(rho), None);
    summary.put("extrapolant", uncond.value);
    summary.put("expectation", target);
    summary.put("abs_error", (uncond.value - target).abs());
    summary.put("error_estimate", uncond.error_estimate);
    if let Some(last) = uncond_orders.last() {
        summary.put_if_finite("order_unconditional", *last);
    }
    match &cond {
        Some(c) => {
            summary.wv_numeric = Some(c.value);
            if let Some(last) = cond_orders.as_ref().and_then(|o| o.last()) {
                summary.put_if_finite("order_conditional", *last);
            }
        }
        None => summary.status = UNDEFINED.to_string(),
    }
    summary.wv_closed = closed;
    if !uncond.converged {
        summary.flag_status("extrapolation not converged");
    }
    rows.push(summary.finalize());
    Ok(rows)
}

pub fn run_sample(cfg: &ExperimentConfig) -> Result<ResultRow, CliError> {
    let setup = cfg.setup()?;
    let eps = cfg.mc.eps;
    let mut row = ResultRow::new(Scenario::Sample, Some(cfg.meter.rho), Some(eps));
    row.put(
        "postselection_probability",
        postselection_probability(&setup, eps)?,
    );
    row.put("n_trials", cfg.mc.n_trials as f64);
    row.put("seed", cfg.mc.seed as f64);
    row.wv_closed = weak_value_closed_form(&setup).ok();
    let est = monte_carlo_conditional_mean(&setup, eps, cfg.mc.n_trials, cfg.mc.seed)?;
    row.mc_n_success = Some(est.n_success);
    let scaled = est.scaled(1.0 / eps);
    row.mc_mean = scaled.mean;
    row.mc_stderr = scaled.std_error;
    match conditional_expectation(&setup, eps) {
        Ok(exact) => {
            let exact = exact / eps;
            row.put("exact_conditional_over_eps", exact);
            if let (Some(m), Some(se)) = (scaled.mean, scaled.std_error) {
                if se > 0.0 {
                    row.put("z_score", (m - exact) / se);
                }
            }
            let chi = sampler_consistency(&setup, eps, cfg.mc.n_trials, cfg.mc.seed)?;
            row.put("chi_square_p", chi.p_value);
        }
        Err(e) if is_orthogonal(&e) => row.status = UNDEFINED.to_string(),
        Err(e) => return Err(e.into()),
    }
    if row.status == OK && est.mean.is_none() {
        row.flag_status("no postselected runs");
    }
    row.disturbance = Some(disturbance(&setup, eps)?);
    Ok(row.finalize())
}

pub fn run_disturbance(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    let setup = cfg.setup()?;
    let eps_values = cfg.eps.values.clone();
    let values: Vec<f64> = eps_values
        .par_iter()
        .map(|&e| disturbance(&setup, e))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(values.len());
    for (i, (&eps, &d)) in eps_values.iter().zip(&values).enumerate() {
        let mut row = ResultRow::new(Scenario::Disturbance, Some(cfg.meter.rho), Some(eps));
        row.disturbance = Some(d);
        row.put("disturbance_over_eps", d / eps);
        if i > 0 {
            let prev = values[i - 1] / eps_values[i - 1];
            row.put("ratio_to_previous", (d / eps) / prev);
        }
        rows.push(row.finalize());
    }
    Ok(rows)
}

/// Grid meter with the configured system: calibration moments, the chirp
/// identity, and the weak value compared with the qubit-meter closed form.
pub fn run_aav_grid(cfg: &ExperimentConfig) -> Result<ResultRow, CliError> {
    let rho = cfg.meter.rho;
    let grid = cfg.grid()?;
    let mut grid_cfg = cfg.clone();
    grid_cfg.meter.kind = crate::config::MeterKind::Grid;
    let setup = grid_cfg.setup_at(rho)?;
    let moment = setup.meter.coupling_moment();
    let mut row = weak_value_row(cfg, Scenario::AavGrid, &setup, rho)?;
    row.put("n_points", grid.n_points() as f64);
    row.put("half_width", grid.half_width());
    row.put("m_b_m", setup.meter.zero_offset());
    row.put("m_bg_m_re", moment.re);
    row.put("m_bg_m_im", moment.im);
    row.put(
        "m_bg_m_residual",
        (moment - num_complex::Complex64::new(rho, 0.5)).norm(),
    );
    row.put("chirp_residual", chirp_equivalence_residual(&grid, rho));
    let qubit = setup.with_meter(qubit_meter(rho));
    if let (Ok(q), Some(n)) = (weak_value_closed_form(&qubit), row.wv_numeric) {
        row.put("qubit_closed_form", q);
        row.put("grid_vs_qubit", (n - q).abs());
    }
    Ok(row.finalize())
}

pub fn run_compare(cfg: &ExperimentConfig) -> Result<ResultRow, CliError> {
    let setup = cfg.setup()?;
    let sched = cfg.schedule()?;
    let eps = cfg.mc.eps;
    let (n, seed) = (cfg.mc.n_trials, cfg.mc.seed);
    let mut row = weak_value_row(cfg, Scenario::Compare, &setup, cfg.meter.rho)?;
    row.eps = Some(eps);
    let (a, s, f) = (&setup.observable, &setup.pre, &setup.post);

    // (a) unconditional meter limit against <s, A s>
    let target = expectation(a, s)?;
    let uncond = unconditional_limit(&setup, &sched)?;
    row.put("unconditional_limit", uncond.value);
    row.put("a_gap", (uncond.value - target).abs());
    let mc_u = monte_carlo_meter_mean(&setup, eps, n, seed)?.scaled(1.0 / eps);
    if let (Some(m), Some(se)) = (mc_u.mean, mc_u.std_error) {
        row.put("mc_unconditional_mean", m);
        row.put("mc_unconditional_stderr", se);
    }

    // (b) conditional meter limit against the projective conditional mean
    if let (Some(wv), Some(p)) = (row.wv_numeric, row.projective_cond) {
        row.put("b_gap", (wv - p).abs());
    }
    match monte_carlo_conditional_mean(&setup, eps, n, seed) {
        Ok(est) => {
            row.mc_n_success = Some(est.n_success);
            let est = est.scaled(1.0 / eps);
            row.mc_mean = est.mean;
            row.mc_stderr = est.std_error;
        }
        Err(e) if is_orthogonal(&e) => {}
        Err(e) => return Err(e.into()),
    }
    match projective_a_oracle(a, s, f, n, seed) {
        Ok(est) => {
            if let Some(m) = est.mean {
                row.put("mc_projective_mean", m);
            }
            if let Some(se) = est.std_error {
                row.put("mc_projective_stderr", se);
            }
        }
        Err(e) if is_orthogonal(&e) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(row.finalize())
}
