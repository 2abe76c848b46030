//! Coupling-strength schedules and Richardson extrapolation to `eps -> 0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Descending coupling strengths plus the Richardson order applied to the
/// sequence of values measured at them.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsSchedule<T: Real> {
    eps_values: Vec<T>,
    order: usize,
}

impl<T: Real> EpsSchedule<T> {
    pub const DEFAULT_EPS: [f64; 5] = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4];

    pub fn new(eps_values: Vec<T>, order: usize) -> Result<Self> {
        if eps_values.len() < 2 {
            return Err(Error::InvalidSchedule(format!(
                "need at least two values, got {}",
                eps_values.len()
            )));
        }
        let half = T::lit(0.5);
        if let Some(bad) = eps_values.iter().find(|&&e| !(e > T::zero() && e <= half)) {
            return Err(Error::InvalidSchedule(format!(
                "value {} outside (0, 0.5]",
                bad.as_f64()
            )));
        }
        if eps_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidSchedule(
                "values must be strictly descending".into(),
            ));
        }
        if order == 0 || order >= eps_values.len() {
            return Err(Error::InvalidSchedule(format!(
                "order {order} needs between 1 and {} for {} values",
                eps_values.len() - 1,
                eps_values.len()
            )));
        }
        Ok(Self { eps_values, order })
    }

    /// Halving schedule from `1e-2` with the full Richardson table.
    pub fn geometric_default() -> Self {
        let eps: Vec<T> = Self::DEFAULT_EPS.iter().map(|&e| T::lit(e)).collect();
        let order = eps.len() - 1;
        Self::new(eps, order).expect("default schedule is valid")
    }

    /// Same values, two-point (first order) Richardson.
    pub fn two_point(eps_values: Vec<T>) -> Result<Self> {
        Self::new(eps_values, 1)
    }

    pub fn eps_values(&self) -> &[T] {
        &self.eps_values
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn with_order(&self, order: usize) -> Result<Self> {
        Self::new(self.eps_values.clone(), order)
    }

    /// Evaluates `f` at every schedule point (in parallel) and extrapolates.
    pub fn extrapolate<F>(&self, f: F) -> Result<Extrapolation<T>>
    where
        F: Fn(T) -> Result<T> + Sync,
    {
        let values = self
            .eps_values
            .par_iter()
            .map(|&e| f(e).map(|v| (e, v)))
            .collect::<Result<Vec<_>>>()?;
        richardson(&values, self.order)
    }
}

/// Result of extrapolating a sequence to `eps = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolation<T: Real> {
    pub value: T,
    /// Difference between the last two extrapolants of the chosen order.
    pub error_estimate: T,
    /// False when the extrapolant differences grow along the sequence.
    pub converged: bool,
    /// The raw `(eps, value)` samples, in schedule order.
    pub samples: Vec<(T, T)>,
    /// Column `order` of the Richardson table.
    pub extrapolants: Vec<T>,
}

/// Neville-Richardson extrapolation to `eps = 0` assuming an expansion
/// `v(eps) = v0 + c1 eps + c2 eps^2 + ...`. Column `order` of the table
/// cancels the first `order` error terms; order 1 on a halving schedule is
/// `2 v(eps/2) - v(eps)`.
pub fn richardson<T: Real>(samples: &[(T, T)], order: usize) -> Result<Extrapolation<T>> {
    let n = samples.len();
    if n < 2 || order == 0 || order >= n {
        return Err(Error::InvalidSchedule(format!(
            "order {order} impossible with {n} samples"
        )));
    }
    let eps: Vec<T> = samples.iter().map(|s| s.0).collect();
    let mut column: Vec<T> = samples.iter().map(|s| s.1).collect();
    let mut previous = column.clone();
    for j in 1..=order {
        previous = column.clone();
        column = (j..n)
            .map(|i| {
                let hi = previous[i - j];
                let lo = previous[i - j + 1];
                lo + (lo - hi) * eps[i] / (eps[i - j] - eps[i])
            })
            .collect();
    }
    let value = *column.last().unwrap();
    let error_estimate = if column.len() >= 2 {
        (value - column[column.len() - 2]).abs()
    } else {
        // single extrapolant: compare with the best lower-order value
        (value - *previous.last().unwrap()).abs()
    };
    let floor = T::EPSILON * T::lit(1e4) * value.abs().max(T::one());
    let diffs: Vec<T> = column.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let converged = match diffs.as_slice() {
        [.., a, b] => !(*b > *a && *b > floor),
        _ => true,
    };
    Ok(Extrapolation {
        value,
        error_estimate,
        converged,
        samples: samples.to_vec(),
        extrapolants: column,
    })
}

/// Observed convergence orders `log2(err_k / err_{k+1})` of the raw
/// samples against a known limit, for successive halvings.
pub fn empirical_orders<T: Real>(samples: &[(T, T)], limit: T) -> Vec<T> {
    samples
        .windows(2)
        .map(|w| {
            let e0 = (w[0].1 - limit).abs();
            let e1 = (w[1].1 - limit).abs();
            (e0 / e1).ln() / (w[0].0 / w[1].0).ln()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        EpsSchedule::<f64>::DEFAULT_EPS
            .iter()
            .map(|&e| (e, f(e)))
            .collect()
    }

    #[test]
    fn two_point_is_2v_half_minus_v() {
        let s = vec![(0.01, 3.0), (0.005, 2.0)];
        let r = richardson(&s, 1).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.extrapolants, vec![1.0]);
    }

    #[test]
    fn order_k_is_exact_on_degree_k_polynomials() {
        let p = |e: f64| 1.5 - 2.0 * e + 7.0 * e * e - 30.0 * e * e * e + 11.0 * e.powi(4);
        let r = richardson(&sample(p), 4).unwrap();
        assert!((r.value - 1.5).abs() < 1e-12);
        let r1 = richardson(&sample(|e| 1.5 - 2.0 * e), 1).unwrap();
        assert!((r1.value - 1.5).abs() < 1e-14);
        assert!(r1.converged);
    }

    #[test]
    fn first_order_error_is_second_order_in_eps() {
        let r = richardson(&sample(|e| 1.0 + e + e * e), 1).unwrap();
        // 2 v(e/2) - v(e) = 1 - e^2/2 at e = 1.25e-3
        assert!((r.value - (1.0 - 1.25e-3f64.powi(2) / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn growing_differences_are_flagged() {
        let s: Vec<(f64, f64)> = sample(|e| (1.0 / e).sin());
        let r = richardson(&s, 1).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn schedule_validation() {
        assert!(EpsSchedule::<f64>::new(vec![0.1], 1).is_err());
        assert!(EpsSchedule::<f64>::new(vec![0.1, 0.2], 1).is_err());
        assert!(EpsSchedule::<f64>::new(vec![0.6, 0.2], 1).is_err());
        assert!(EpsSchedule::<f64>::new(vec![0.1, 0.0], 1).is_err());
        assert!(EpsSchedule::<f64>::new(vec![0.1, 0.05], 2).is_err());
        assert!(EpsSchedule::<f64>::new(vec![0.1, 0.05], 1).is_ok());
        assert_eq!(EpsSchedule::<f64>::geometric_default().order(), 4);
    }

    #[test]
    fn empirical_order_of_linear_error_is_one() {
        let orders = empirical_orders(&sample(|e| 2.0 + 3.0 * e), 2.0);
        for o in orders {
            assert!((o - 1.0).abs() < 1e-9);
        }
    }
}
