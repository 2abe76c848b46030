//! Concrete meters: the two-level family that reaches any weak value, and a
//! periodic-grid discretization of the continuous position/momentum meter.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{Observable, StateVector};
use crate::protocol::MeterSpec;
use crate::scalar::{c, c_re, phase, Real, C};

/// Two-level meter with `m = e1`, `G = sigma_x` and
/// `B = [[0, rho + i/2], [rho - i/2, 0]]`, so that `<m, BG m> = rho + i/2`.
pub fn qubit_meter<T: Real>(rho: T) -> MeterSpec<T> {
    MeterSpec::new(
        StateVector::basis(2, 0),
        qubit_meter_observable(rho, T::one()),
        Observable::pauli_x(),
    )
    .expect("qubit meter is calibrated for every finite rho")
}

/// Like [`qubit_meter`] but with `2 Im<m, BG m> = gain`; deliberately
/// miscalibrated when `gain != 1`.
pub fn qubit_meter_with_gain<T: Real>(rho: T, gain: T) -> MeterSpec<T> {
    MeterSpec::uncalibrated(
        StateVector::basis(2, 0),
        qubit_meter_observable(rho, gain),
        Observable::pauli_x(),
    )
    .expect("dimensions agree")
}

fn qubit_meter_observable<T: Real>(rho: T, gain: T) -> Observable<T> {
    let z = c_re(T::zero());
    let half = gain * T::lit(0.5);
    let upper = c(rho, half);
    Observable::new(DMatrix::from_row_slice(2, 2, &[z, upper, upper.conj(), z]))
        .expect("Hermitian by construction")
}

/// Uniform periodic grid of `n_points` on `[-L, L)` with spacing `2L / n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T: Real> {
    n_points: usize,
    half_width: T,
}

impl<T: Real> GridSpec<T> {
    pub const DEFAULT_POINTS: usize = 1024;
    pub const DEFAULT_HALF_WIDTH: f64 = 20.0;
    pub const MIN_POINTS: usize = 128;

    /// `n_points` must be a power of two, at least 128. Domains narrower
    /// than about ten Gaussian widths are accepted here and rejected by the
    /// meter calibration check instead.
    pub fn new(n_points: usize, half_width: T) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points = {n_points} must be a power of two >= {}",
                Self::MIN_POINTS
            )));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half_width = {} must be positive",
                half_width.as_f64()
            )));
        }
        Ok(Self {
            n_points,
            half_width,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn spacing(&self) -> T {
        self.half_width * T::lit(2.0) / T::from_usize(self.n_points).unwrap()
    }

    /// `q_k = -L + k * spacing`.
    pub fn points(&self) -> Vec<T> {
        let (l, h) = (self.half_width, self.spacing());
        (0..self.n_points)
            .map(|k| -l + T::from_usize(k).unwrap() * h)
            .collect()
    }

    /// Angular wavenumbers `2 pi k / (2L)` for `k` in `[-n/2, n/2)`.
    pub fn wavenumbers(&self) -> Vec<T> {
        let n = self.n_points as i64;
        let unit = T::pi() / self.half_width;
        (-n / 2..n / 2)
            .map(|k| unit * T::from_i64(k).unwrap())
            .collect()
    }
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self::new(Self::DEFAULT_POINTS, T::lit(Self::DEFAULT_HALF_WIDTH)).unwrap()
    }
}

/// Multiplication by the grid coordinate.
pub fn position_operator<T: Real>(grid: &GridSpec<T>) -> Observable<T> {
    Observable::from_real_diagonal(&grid.points())
}

/// Spectral `-i d/dq` on the periodic grid: `F^dagger diag(k) F` with `F`
/// the unitary DFT. The result is circulant with first column
/// `c_d = (1/n) sum_k k e^{2 pi i k d / n}`.
pub fn momentum_operator<T: Real>(grid: &GridSpec<T>) -> Observable<T> {
    let n = grid.n_points;
    let nt = T::from_usize(n).unwrap();
    let twiddle: Vec<C<T>> = (0..n)
        .map(|t| phase(-T::two_pi() * T::from_usize(t).unwrap() / nt))
        .collect();
    let wavenumbers = grid.wavenumbers();
    let half = (n / 2) as i64;
    let column: Vec<C<T>> = (0..n as i64)
        .map(|d| {
            let sum = wavenumbers
                .iter()
                .enumerate()
                .fold(c_re(T::zero()), |acc, (idx, &kappa)| {
                    let k = idx as i64 - half;
                    acc + twiddle[(k * d).rem_euclid(n as i64) as usize] * kappa
                });
            sum / nt
        })
        .collect();
    let entries = DMatrix::from_fn(n, n, |j, l| column[(j + n - l) % n]);
    Observable::new(entries).expect("circulant with Hermitian symbol")
}

/// Samples of `[e^{-q^2/2} / sqrt(2 pi)]^{1/2}`, normalized on the grid.
pub fn gaussian_state<T: Real>(grid: &GridSpec<T>) -> StateVector<T> {
    let norm = T::one() / T::two_pi().sqrt();
    let amps: Vec<T> = grid
        .points()
        .iter()
        .map(|&q| (norm * (-q * q * T::lit(0.5)).exp()).sqrt())
        .collect();
    StateVector::from_real(&amps).expect("Gaussian is nonzero on any grid containing 0")
}

/// Gaussian meter with `B = Q` and `G = P + rho Q`; `<m, BG m> = rho + i/2`
/// up to discretization error, which the calibration check bounds.
pub fn gaussian_grid_meter<T: Real>(grid: &GridSpec<T>, rho: T) -> Result<MeterSpec<T>> {
    let q = position_operator(grid);
    let g = momentum_operator(grid).add(&q.scaled(rho))?;
    MeterSpec::new(gaussian_state(grid), q, g)
}

/// `q -> e^{-i q^2 rho / 2} m(q)`.
///
/// Its position density is the Gaussian's. Since
/// `-i d/dq (e^{-i q^2 rho/2} g) = e^{-i q^2 rho/2} (P - rho Q) g`, reading
/// this state with `G = P` reproduces the Gaussian meter with `G = P - rho Q`.
pub fn chirped_gaussian_state<T: Real>(grid: &GridSpec<T>, rho: T) -> StateVector<T> {
    let m = gaussian_state(grid);
    let amps = grid
        .points()
        .iter()
        .zip(m.amps())
        .map(|(&q, &a)| a * phase(q * q * rho * T::lit(0.5)))
        .collect();
    StateVector::raw(amps).expect("nonempty")
}

/// `|<m, Q e^{-iQ^2 rho/2} P e^{iQ^2 rho/2} m> - <m, Q (P + rho Q) m>|`
/// on the grid: the chirp-conjugation identity
/// `e^{-iQ^2 rho/2} P e^{iQ^2 rho/2} = P + rho Q` in expectation form. The
/// state `e^{iQ^2 rho/2} m` is [`chirped_gaussian_state`] at `-rho`.
pub fn chirp_equivalence_residual<T: Real>(grid: &GridSpec<T>, rho: T) -> T {
    let q = position_operator(grid);
    let p = momentum_operator(grid);
    let m = gaussian_state(grid);
    let w = chirped_gaussian_state(grid, -rho);
    let conjugated = w.inner(&q.apply(&p.apply(&w).unwrap()).unwrap()).unwrap();
    let g = p.add(&q.scaled(rho)).unwrap();
    let direct = m.inner(&q.apply(&g.apply(&m).unwrap()).unwrap()).unwrap();
    (conjugated - direct).norm_sqr().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::expectation;

    type C64 = C<f64>;

    fn grid() -> GridSpec<f64> {
        GridSpec::default()
    }

    fn moment(a: &Observable<f64>, b: &Observable<f64>, v: &StateVector<f64>) -> C64 {
        v.inner(&a.apply(&b.apply(v).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn qubit_meter_moments() {
        let m0 = qubit_meter(0.0);
        assert_eq!(m0.zero_offset(), 0.0);
        assert_eq!(m0.coupling_moment(), C64::new(0.0, 0.5));
        let m50 = qubit_meter(50.0);
        assert_eq!(m50.coupling_moment(), C64::new(50.0, 0.5));
        assert_eq!(m50.rho(), 50.0);
        assert_eq!(m50.gain(), 1.0);
        let b = m50.observable().matrix();
        assert_eq!(b[(0, 1)], b[(1, 0)].conj());
    }

    #[test]
    fn miscalibrated_qubit_meter_is_rejected_by_checked_constructor() {
        let spec = qubit_meter_with_gain(1.0, 0.5);
        assert_eq!(spec.gain(), 0.5);
        let err = MeterSpec::new(
            spec.state().clone(),
            spec.observable().clone(),
            spec.coupling().clone(),
        );
        assert!(matches!(err, Err(Error::Calibration(_))));
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::<f64>::new(100, 20.0).is_err());
        assert!(GridSpec::<f64>::new(64, 20.0).is_err());
        assert!(GridSpec::<f64>::new(128, -1.0).is_err());
        let g = GridSpec::<f64>::new(128, 4.0).unwrap();
        assert_eq!(g.spacing(), 8.0 / 128.0);
    }

    #[test]
    fn position_operator_is_grid_diagonal() {
        let g = grid();
        let q = position_operator(&g);
        for (k, &x) in g.points().iter().enumerate() {
            assert_eq!(
                q.matrix()[(k, k)],
                C64::new(-20.0 + k as f64 * g.spacing(), 0.0)
            );
            assert_eq!(x, -20.0 + k as f64 * g.spacing());
        }
        assert!(expectation(&q, &gaussian_state(&g)).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn plane_wave_is_momentum_eigenvector() {
        let g = GridSpec::<f64>::new(128, 10.0).unwrap();
        let p = momentum_operator(&g);
        let k0 = g.wavenumbers()[64 + 5];
        let wave: Vec<C64> = g
            .points()
            .iter()
            .map(|&q| C64::new(0.0, k0 * q).exp())
            .collect();
        let v = StateVector::new(wave).unwrap();
        let pv = p.apply(&v).unwrap();
        let err = pv.sub(&v.scaled(C64::new(k0, 0.0))).unwrap().norm();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn gaussian_momentum_moments() {
        let g = grid();
        let m = gaussian_state(&g);
        let p = momentum_operator(&g);
        let q = position_operator(&g);
        assert!(expectation(&p, &m).unwrap().abs() < 1e-12);
        let qp = moment(&q, &p, &m);
        assert!((qp - C64::new(0.0, 0.5)).norm() < 1e-8, "{qp}");
        // variance-one density
        let q2 = moment(&q, &q, &m);
        assert!((q2.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_meter_moments() {
        let g = grid();
        for &rho in &[0.0, 3.0] {
            let meter = gaussian_grid_meter(&g, rho).unwrap();
            assert!(meter.zero_offset().abs() <= 1e-10);
            let bg = meter.coupling_moment();
            assert!((bg - C64::new(rho, 0.5)).norm() <= 1e-8, "{bg}");
        }
    }

    #[test]
    fn narrow_grid_fails_calibration() {
        let coarse = GridSpec::<f64>::new(128, 4.0).unwrap();
        assert!(matches!(
            gaussian_grid_meter(&coarse, 3.0),
            Err(Error::Calibration(_))
        ));
    }

    #[test]
    fn chirp_preserves_density() {
        let g = grid();
        let m = gaussian_state(&g);
        assert_eq!(chirped_gaussian_state(&g, 0.0), m);
        let ch = chirped_gaussian_state(&g, 5.0);
        for (a, b) in ch.amps().iter().zip(m.amps()) {
            assert!((a.norm_sqr() - b.norm_sqr()).abs() <= 1e-12);
        }
    }

    #[test]
    fn chirp_conjugation_identity() {
        let g = grid();
        for &rho in &[0.0, 1.0, 3.0] {
            let r = chirp_equivalence_residual(&g, rho);
            assert!(r <= 1e-8, "rho {rho}: {r}");
        }
    }

    #[test]
    fn negative_phase_chirp_realizes_minus_rho() {
        let g = grid();
        let (p, q) = (momentum_operator(&g), position_operator(&g));
        let rho = 3.0;
        let ch = chirped_gaussian_state(&g, rho);
        let got = moment(&q, &p, &ch);
        assert!((got - C64::new(-rho, 0.5)).norm() < 1e-8, "{got}");
    }

    #[test]
    fn coupling_moment_converges_with_resolution() {
        // L = 10 keeps boundary mass ~1e-23 so resolution dominates
        let mut prev = f64::INFINITY;
        for n in [128usize, 256, 512] {
            let g = GridSpec::<f64>::new(n, 10.0).unwrap();
            let meter = gaussian_grid_meter(&g, 1.0).unwrap();
            let err = (meter.coupling_moment() - C64::new(1.0, 0.5)).norm();
            assert!(err <= (prev / 2.0).max(1e-10), "n {n}: {err} vs {prev}");
            prev = err;
        }
    }
}
