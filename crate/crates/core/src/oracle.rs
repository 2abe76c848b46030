//! Ground truth for the protocol: the exact joint distribution of meter
//! eigenvalue and postselection outcome, and a seeded event-by-event
//! Monte Carlo of the physical procedure.
//!
//! Trial `i` of a run seeded with `seed` draws from ChaCha8 stream `i` of
//! key `seed`, so sharded and serial runs produce identical counts.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, Observable, StateVector};
use crate::protocol::{coupled_state, postselected_meter_vector, WeakSetup};
use crate::scalar::{Real, C};

/// One eigenspace of the meter observable.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeEntry<T: Real> {
    pub b_value: T,
    /// `|(I (x) P_Q) r|^2`.
    pub branch_prob: T,
    /// `|(P_f (x) P_Q) r|^2`.
    pub joint_prob_success: T,
}

/// Exact outcome distribution of reading `I (x) B` and postselecting on `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeTable<T: Real> {
    pub entries: Vec<OutcomeEntry<T>>,
    pub total_success_prob: T,
    pub conditional_mean: T,
}

pub fn exact_outcome_distribution<T: Real>(
    setup: &WeakSetup<T>,
    eps: T,
) -> Result<OutcomeTable<T>> {
    if !(eps > T::zero()) {
        return Err(Error::NonPositiveEps(eps.as_f64()));
    }
    let r = coupled_state(setup, eps)?;
    let (ds, dm) = (setup.dim_system(), setup.dim_meter());
    let spec = setup.meter.observable().spectrum();
    let x = postselected_meter_vector(&setup.post, &r, dm);
    let blocks: Vec<DVector<C<T>>> = (0..ds)
        .map(|i| r.as_vector().rows(i * dm, dm).into_owned())
        .collect();

    let mut entries = Vec::with_capacity(spec.groups().len());
    let (mut total, mut weighted) = (T::zero(), T::zero());
    for g in 0..spec.groups().len() {
        let joint = spec.project_vec(g, &x).norm_squared();
        let branch = blocks.iter().fold(T::zero(), |acc, b| {
            acc + spec.project_vec(g, b).norm_squared()
        });
        let b_value = spec.group_value(g);
        total += joint;
        weighted += b_value * joint;
        entries.push(OutcomeEntry {
            b_value,
            branch_prob: branch,
            joint_prob_success: joint,
        });
    }
    if !(total > T::zero()) {
        return Err(Error::EmptyPostselection {
            probability: total.as_f64(),
        });
    }
    Ok(OutcomeTable {
        entries,
        total_success_prob: total,
        conditional_mean: weighted / total,
    })
}

/// A single run of the procedure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome<T: Real> {
    pub b_value: T,
    pub postselected: bool,
}

/// Sample mean over postselected runs.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateWithError<T: Real> {
    /// `None` when no run was postselected.
    pub mean: Option<T>,
    /// Sample standard deviation over `sqrt(n_success)`; `None` below two
    /// successes.
    pub std_error: Option<T>,
    pub n_success: u64,
    pub n_trials: u64,
    pub seed: u64,
}

impl<T: Real> EstimateWithError<T> {
    pub fn is_empty(&self) -> bool {
        self.n_success == 0
    }

    /// Mean and standard error multiplied by `factor` (e.g. `1/eps`).
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            mean: self.mean.map(|m| m * factor),
            std_error: self.std_error.map(|s| s * factor.abs()),
            ..self.clone()
        }
    }
}

/// Two-stage categorical sampler: pick a branch, then a postselection
/// outcome with a branch-dependent success probability.
#[derive(Clone, Debug)]
pub struct TwoStageSampler<T: Real> {
    values: Vec<T>,
    cumulative: Vec<f64>,
    success: Vec<f64>,
}

/// Counts of `(branch, postselected)` events.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub success: Vec<u64>,
    pub failure: Vec<u64>,
}

impl OutcomeCounts {
    fn zeros(k: usize) -> Self {
        Self {
            success: vec![0; k],
            failure: vec![0; k],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.success.iter_mut().zip(other.success) {
            *a += b;
        }
        for (a, b) in self.failure.iter_mut().zip(other.failure) {
            *a += b;
        }
        self
    }

    pub fn n_trials(&self) -> u64 {
        self.success.iter().sum::<u64>() + self.failure.iter().sum::<u64>()
    }

    pub fn n_success(&self) -> u64 {
        self.success.iter().sum()
    }
}

const SHARD: u64 = 1 << 15;

impl<T: Real> TwoStageSampler<T> {
    fn new(values: Vec<T>, branch_probs: Vec<f64>, success: Vec<f64>) -> Self {
        let total: f64 = branch_probs.iter().sum();
        let mut acc = 0.0;
        let cumulative = branch_probs
            .iter()
            .map(|p| {
                acc += p / total;
                acc
            })
            .collect();
        Self {
            values,
            cumulative,
            success: success.into_iter().map(|p| p.clamp(0.0, 1.0)).collect(),
        }
    }

    /// Reads `I (x) B` on `r(eps)` branch by branch, collapsing and
    /// renormalizing before computing each postselection probability.
    pub fn for_meter(setup: &WeakSetup<T>, eps: T) -> Result<Self> {
        let r = coupled_state(setup, eps)?;
        let (ds, dm) = (setup.dim_system(), setup.dim_meter());
        let spec = setup.meter.observable().spectrum();
        let (mut values, mut probs, mut success) = (Vec::new(), Vec::new(), Vec::new());
        for g in 0..spec.groups().len() {
            let mut branch = DVector::<C<T>>::zeros(ds * dm);
            for i in 0..ds {
                let proj = spec.project_vec(g, &r.as_vector().rows(i * dm, dm).into_owned());
                branch.rows_mut(i * dm, dm).copy_from(&proj);
            }
            let p = branch.norm_squared();
            let q = if p > T::zero() {
                let collapsed = StateVector::from_dvector(branch.unscale(p.sqrt()));
                postselected_meter_vector(&setup.post, &collapsed, dm)
                    .norm_squared()
                    .as_f64()
            } else {
                0.0
            };
            values.push(spec.group_value(g));
            probs.push(p.as_f64());
            success.push(q);
        }
        Ok(Self::new(values, probs, success))
    }

    /// Measures `A` projectively on `s`, then postselects the collapsed
    /// state on `f`.
    pub fn for_observable(
        a: &Observable<T>,
        s: &StateVector<T>,
        f: &StateVector<T>,
    ) -> Result<Self> {
        check_dim(a.dim(), s.dim())?;
        check_dim(a.dim(), f.dim())?;
        let spec = a.spectrum();
        let (mut values, mut probs, mut success) = (Vec::new(), Vec::new(), Vec::new());
        for g in 0..spec.groups().len() {
            let ps = spec.project(g, s)?;
            let p = ps.norm_sqr();
            let q = match ps.normalized() {
                Ok(hat) if p > T::zero() => f.inner(&hat)?.norm_sqr().as_f64(),
                _ => 0.0,
            };
            values.push(spec.group_value(g));
            probs.push(p.as_f64());
            success.push(q);
        }
        Ok(Self::new(values, probs, success))
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, bool) {
        let u: f64 = rng.random();
        let k = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.values.len() - 1);
        let v: f64 = rng.random();
        (k, v < self.success[k])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome<T> {
        let (k, postselected) = self.sample_index(rng);
        Outcome {
            b_value: self.values[k],
            postselected,
        }
    }

    /// `n_trials` independent runs; trial `i` uses stream `i` of `seed`.
    pub fn run(&self, n_trials: u64, seed: u64) -> OutcomeCounts {
        let base = ChaCha8Rng::seed_from_u64(seed);
        let k = self.values.len();
        let shards = n_trials.div_ceil(SHARD);
        (0..shards)
            .into_par_iter()
            .map(|shard| {
                let mut counts = OutcomeCounts::zeros(k);
                let end = ((shard + 1) * SHARD).min(n_trials);
                for trial in shard * SHARD..end {
                    let mut rng = base.clone();
                    rng.set_stream(trial);
                    let (idx, ok) = self.sample_index(&mut rng);
                    if ok {
                        counts.success[idx] += 1;
                    } else {
                        counts.failure[idx] += 1;
                    }
                }
                counts
            })
            .reduce(|| OutcomeCounts::zeros(k), OutcomeCounts::merge)
    }

    pub fn estimate(&self, n_trials: u64, seed: u64) -> Result<EstimateWithError<T>> {
        if n_trials == 0 {
            return Err(Error::NoTrials);
        }
        let counts = self.run(n_trials, seed);
        Ok(estimate_from_counts(&self.values, &counts, seed))
    }
}

fn estimate_from_counts<T: Real>(
    values: &[T],
    counts: &OutcomeCounts,
    seed: u64,
) -> EstimateWithError<T> {
    let n = counts.n_success();
    let (mean, std_error) = if n == 0 {
        (None, None)
    } else {
        let nf = n as f64;
        let vals: Vec<f64> = values.iter().map(|v| v.as_f64()).collect();
        let mean = vals
            .iter()
            .zip(&counts.success)
            .map(|(v, &c)| v * c as f64)
            .sum::<f64>()
            / nf;
        let se = (n >= 2).then(|| {
            let ss: f64 = vals
                .iter()
                .zip(&counts.success)
                .map(|(v, &c)| c as f64 * (v - mean).powi(2))
                .sum();
            (ss / (nf - 1.0) / nf).sqrt()
        });
        (Some(T::lit(mean)), se.map(T::lit))
    };
    EstimateWithError {
        mean,
        std_error,
        n_success: n,
        n_trials: counts.n_trials(),
        seed,
    }
}

/// One run: read the meter, then ask whether the system is in `f`.
pub fn sample_run<T: Real, R: Rng + ?Sized>(
    setup: &WeakSetup<T>,
    eps: T,
    rng: &mut R,
) -> Result<Outcome<T>> {
    if !(eps > T::zero()) {
        return Err(Error::NonPositiveEps(eps.as_f64()));
    }
    Ok(TwoStageSampler::for_meter(setup, eps)?.sample(rng))
}

/// Mean meter reading over postselected runs (not divided by `eps`).
pub fn monte_carlo_conditional_mean<T: Real>(
    setup: &WeakSetup<T>,
    eps: T,
    n_trials: u64,
    seed: u64,
) -> Result<EstimateWithError<T>> {
    if !(eps > T::zero()) {
        return Err(Error::NonPositiveEps(eps.as_f64()));
    }
    TwoStageSampler::for_meter(setup, eps)?.estimate(n_trials, seed)
}

/// Mean meter reading over every run, postselected or not (not divided by
/// `eps`). `n_success` counts the runs included, i.e. all of them.
pub fn monte_carlo_meter_mean<T: Real>(
    setup: &WeakSetup<T>,
    eps: T,
    n_trials: u64,
    seed: u64,
) -> Result<EstimateWithError<T>> {
    if !(eps > T::zero()) {
        return Err(Error::NonPositiveEps(eps.as_f64()));
    }
    if n_trials == 0 {
        return Err(Error::NoTrials);
    }
    let sampler = TwoStageSampler::for_meter(setup, eps)?;
    let counts = sampler.run(n_trials, seed);
    let pooled = OutcomeCounts {
        success: counts
            .success
            .iter()
            .zip(&counts.failure)
            .map(|(a, b)| a + b)
            .collect(),
        failure: vec![0; counts.failure.len()],
    };
    Ok(estimate_from_counts(&sampler.values, &pooled, seed))
}

/// Mean eigenvalue of `A` over runs whose postselection to `f` succeeded.
pub fn projective_a_oracle<T: Real>(
    a: &Observable<T>,
    s: &StateVector<T>,
    f: &StateVector<T>,
    n_trials: u64,
    seed: u64,
) -> Result<EstimateWithError<T>> {
    TwoStageSampler::for_observable(a, s, f)?.estimate(n_trials, seed)
}

/// Pearson goodness-of-fit result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of `observed` counts against cell probabilities. Cells
/// expected to hold fewer than five events are pooled into one.
pub fn chi_square_test(observed: &[u64], probs: &[f64]) -> ChiSquare {
    assert_eq!(observed.len(), probs.len());
    let n: f64 = observed.iter().sum::<u64>() as f64;
    let total_p: f64 = probs.iter().sum();
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pool_obs, mut pool_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        let e = n * p / total_p;
        if e < 5.0 {
            pool_obs += o as f64;
            pool_exp += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp;
        cells += 1;
    }
    let dof = cells.saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64)
        .map(|d| d.sf(stat))
        .unwrap_or(f64::NAN);
    ChiSquare {
        statistic: stat,
        dof,
        p_value,
    }
}

/// Samples the procedure `n_trials` times and tests the joint
/// `(eigenspace, postselected)` counts against the exact table.
pub fn sampler_consistency<T: Real>(
    setup: &WeakSetup<T>,
    eps: T,
    n_trials: u64,
    seed: u64,
) -> Result<ChiSquare> {
    let table = exact_outcome_distribution(setup, eps)?;
    let counts = TwoStageSampler::for_meter(setup, eps)?.run(n_trials, seed);
    let mut observed = Vec::new();
    let mut probs = Vec::new();
    for (k, e) in table.entries.iter().enumerate() {
        observed.push(counts.success[k]);
        probs.push(e.joint_prob_success.as_f64());
        observed.push(counts.failure[k]);
        probs.push((e.branch_prob - e.joint_prob_success).as_f64().max(0.0));
    }
    Ok(chi_square_test(&observed, &probs))
}
