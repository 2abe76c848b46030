//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real field the simulation is generic over (`f32` or `f64`).
///
/// Amplitudes and matrix entries are `Complex<T>`; nalgebra implements
/// `ComplexField` for those, which is what the eigensolver needs.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Machine epsilon of the type.
    const EPSILON: Self;

    /// Converts an `f64` literal. Never fails for finite inputs.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// Absolute tolerance `tol`, raised to a small multiple of machine
    /// epsilon when the type cannot resolve it (f32 vs a 1e-12 bound).
    fn tol(tol: f64) -> Self {
        let floor = Self::EPSILON * Self::lit(256.0);
        let t = Self::lit(tol);
        if t < floor {
            floor
        } else {
            t
        }
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const EPSILON: Self = f32::EPSILON;
}

impl Real for f64 {
    const EPSILON: Self = f64::EPSILON;
}

/// `Complex<T>` shorthand.
pub type C<T> = Complex<T>;

pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

pub(crate) fn c_re<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `e^{-i theta}`.
pub(crate) fn phase<T: Real>(theta: T) -> C<T> {
    Complex::new(theta.cos(), -theta.sin())
}
