//! Weak measurement with postselection, simulated exactly on
//! finite-dimensional Hilbert spaces.
//!
//! The numerical routines are generic over the real scalar ([`Real`]:
//! `f32` or `f64`); the `*64` aliases below fix it to `f64`, which is what
//! the tolerances in the documentation refer to.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hilbert;
pub mod meters;
pub mod oracle;
pub mod protocol;
pub mod scalar;

pub use error::{Error, Result};
pub use hilbert::{DensityMatrix, Observable, SpectralDecomposition, StateVector};
pub use meters::GridSpec;
pub use oracle::{EstimateWithError, Outcome, OutcomeTable};
pub use protocol::{EpsSchedule, Extrapolation, MeterSpec, WeakSetup, WeakValueReport};
pub use scalar::{Real, C};

pub type Complex64 = C<f64>;
pub type StateVector64 = StateVector<f64>;
pub type Observable64 = Observable<f64>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type SpectralDecomposition64 = SpectralDecomposition<f64>;
pub type MeterSpec64 = MeterSpec<f64>;
pub type WeakSetup64 = WeakSetup<f64>;
pub type EpsSchedule64 = EpsSchedule<f64>;
pub type Extrapolation64 = Extrapolation<f64>;
pub type WeakValueReport64 = WeakValueReport<f64>;
pub type GridSpec64 = GridSpec<f64>;
pub type OutcomeTable64 = OutcomeTable<f64>;
pub type EstimateWithError64 = EstimateWithError<f64>;

pub type StateVector32 = StateVector<f32>;
pub type Observable32 = Observable<f32>;
pub type WeakSetup32 = WeakSetup<f32>;
