#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakmeas_core::{Complex64, Observable64, StateVector64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = rng.random::<f64>().max(1e-300);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> StateVector64 {
    let amps = (0..dim)
        .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
        .collect();
    StateVector64::new(amps).unwrap()
}

/// Hermitian with entries of order one: (X + X^dagger) / 2, X Gaussian.
pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Observable64 {
    let x = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(gaussian(rng), gaussian(rng))
    });
    Observable64::new((&x + x.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

pub fn max_entry_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
