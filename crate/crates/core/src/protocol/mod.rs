//! The weak measurement protocol.
//!
//! A system observable `A` is coupled to a meter through `H = A (x) G`; the
//! composite starts in `s (x) m` and evolves for a short "time" `eps`. The
//! meter observable `B` is then read, optionally conditioned on a
//! postselection `P_f` of the system. Everything here is exact linear
//! algebra; the `eps -> 0` limits go through [`EpsSchedule`].

mod schedule;

pub use schedule::{empirical_orders, richardson, EpsSchedule, Extrapolation};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hilbert::{
    check_dim, evolve_coupling, expectation, partial_trace_pure_unnormalized, DensityMatrix,
    Observable, StateVector,
};
use crate::scalar::{c_re, Real, C};

/// `|<m, B m>|` above this means the meter does not read zero.
pub const ZERO_OFFSET_TOL: f64 = 1e-10;
/// `|2 Im<m, BG m> - 1|` above this means the meter gain is not one.
pub const GAIN_TOL: f64 = 1e-8;
/// `|<f, s>|` at or below this makes every postselected limit undefined.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
/// Postselection probabilities below this are treated as an empty event.
pub const MIN_POSTSELECTION_PROB: f64 = 1e-20;

/// A meter: its initial state `m`, the observable `B` that is read, and
/// the coupling operator `G` entering `H = A (x) G`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeterSpec<T: Real> {
    state: StateVector<T>,
    observable: Observable<T>,
    coupling: Observable<T>,
}

impl<T: Real> MeterSpec<T> {
    /// A calibrated meter: `<m, B m> = 0` and `2 Im<m, BG m> = 1`.
    pub fn new(
        state: StateVector<T>,
        observable: Observable<T>,
        coupling: Observable<T>,
    ) -> Result<Self> {
        let meter = Self::uncalibrated(state, observable, coupling)?;
        let offset = meter.zero_offset();
        if offset.abs() > T::tol(ZERO_OFFSET_TOL) {
            return Err(Error::Calibration(format!(
                "<m, B m> = {:e}, expected 0",
                offset.as_f64()
            )));
        }
        let gain = meter.gain();
        if (gain - T::one()).abs() > T::tol(GAIN_TOL) {
            return Err(Error::Calibration(format!(
                "2 Im<m, BG m> = {}, expected 1",
                gain.as_f64()
            )));
        }
        Ok(meter)
    }

    /// Skips the calibration checks. Used to show what a miscalibrated
    /// meter reports.
    pub fn uncalibrated(
        state: StateVector<T>,
        observable: Observable<T>,
        coupling: Observable<T>,
    ) -> Result<Self> {
        check_dim(state.dim(), observable.dim())?;
        check_dim(state.dim(), coupling.dim())?;
        Ok(Self {
            state: state.normalized()?,
            observable,
            coupling,
        })
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    pub fn state(&self) -> &StateVector<T> {
        &self.state
    }

    /// The meter observable `B`.
    pub fn observable(&self) -> &Observable<T> {
        &self.observable
    }

    /// The coupling operator `G`.
    pub fn coupling(&self) -> &Observable<T> {
        &self.coupling
    }

    /// `<m, B m>`.
    pub fn zero_offset(&self) -> T {
        self.state
            .inner(&self.observable.apply(&self.state).unwrap())
            .unwrap()
            .re
    }

    /// `<m, BG m>`.
    pub fn coupling_moment(&self) -> C<T> {
        let gm = self.coupling.apply(&self.state).unwrap();
        self.state
            .inner(&self.observable.apply(&gm).unwrap())
            .unwrap()
    }

    /// `2 Im<m, BG m>`, the factor multiplying `<s, A s>` in the
    /// unconditional limit.
    pub fn gain(&self) -> T {
        self.coupling_moment().im * T::lit(2.0)
    }

    /// `Re<m, BG m>`.
    pub fn rho(&self) -> T {
        self.coupling_moment().re
    }
}

/// Observable `A`, preselected state `s`, postselected state `f`, meter.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakSetup<T: Real> {
    pub observable: Observable<T>,
    pub pre: StateVector<T>,
    pub post: StateVector<T>,
    pub meter: MeterSpec<T>,
}

impl<T: Real> WeakSetup<T> {
    pub fn new(
        observable: Observable<T>,
        pre: StateVector<T>,
        post: StateVector<T>,
        meter: MeterSpec<T>,
    ) -> Result<Self> {
        check_dim(observable.dim(), pre.dim())?;
        check_dim(observable.dim(), post.dim())?;
        Ok(Self {
            observable,
            pre: pre.normalized()?,
            post: post.normalized()?,
            meter,
        })
    }

    pub fn dim_system(&self) -> usize {
        self.observable.dim()
    }

    pub fn dim_meter(&self) -> usize {
        self.meter.dim()
    }

    /// Same system data with another meter.
    pub fn with_meter(&self, meter: MeterSpec<T>) -> Self {
        Self {
            meter,
            ..self.clone()
        }
    }

    /// `<f, s>`.
    pub fn overlap(&self) -> C<T> {
        self.post.inner(&self.pre).unwrap()
    }

    fn require_overlap(&self) -> Result<C<T>> {
        require_overlap(&self.pre, &self.post)
    }
}

fn require_overlap<T: Real>(s: &StateVector<T>, f: &StateVector<T>) -> Result<C<T>> {
    let ov = f.inner(s)?;
    let mag = ov.norm_sqr().sqrt();
    if mag <= T::tol(ORTHOGONALITY_TOL) {
        return Err(Error::OrthogonalSelection {
            overlap: mag.as_f64(),
        });
    }
    Ok(ov)
}

fn require_positive<T: Real>(eps: T) -> Result<()> {
    if eps > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositiveEps(eps.as_f64()))
    }
}

/// `r(eps) = e^{-i eps (A (x) G)} (s (x) m)`.
pub fn coupled_state<T: Real>(setup: &WeakSetup<T>, eps: T) -> Result<StateVector<T>> {
    if eps < T::zero() {
        return Err(Error::NonPositiveEps(eps.as_f64()));
    }
    let product = setup.pre.tensor(setup.meter.state());
    evolve_coupling(&setup.observable, setup.meter.coupling(), eps, &product)
}

/// Block `i` of a system-major composite vector: the meter amplitudes
/// paired with system basis state `i`.
fn block<T: Real>(r: &DVector<C<T>>, i: usize, dm: usize) -> DVector<C<T>> {
    r.rows(i * dm, dm).into_owned()
}

/// `(<f| (x) I) r`, the meter vector left after a successful postselection.
pub(crate) fn postselected_meter_vector<T: Real>(
    post: &StateVector<T>,
    r: &StateVector<T>,
    dm: usize,
) -> DVector<C<T>> {
    let amps = r.as_vector();
    let mut out = DVector::zeros(dm);
    for (i, fi) in post.amps().iter().enumerate() {
        out.axpy(fi.conj(), &amps.rows(i * dm, dm), c_re(T::one()));
    }
    out
}

/// `<r, (I (x) B) r>` without the division by `eps`.
pub fn meter_average<T: Real>(setup: &WeakSetup<T>, eps: T) -> Result<T> {
    let r = coupled_state(setup, eps)?;
    let dm = setup.dim_meter();
    let b = setup.meter.observable().matrix();
    let amps = r.as_vector();
    let total = (0..setup.dim_system()).fold(T::zero(), |acc, i| {
        let x = block(amps, i, dm);
        acc + x.dotc(&(b * &x)).re
    });
    Ok(total)
}

/// Normalized average meter reading `<r, (I (x) B) r> / eps`.
pub fn meter_reading<T: Real>(setup: &WeakSetup<T>, eps: T) -> Result<T> {
    require_positive(eps)?;
    Ok(meter_average(setup, eps)? / eps)
}

/// `lim_{eps->0}` of [`meter_reading`], which is `2 Im<m,BG m> <s, A s>`.
pub fn unconditional_limit<T: Real>(
    setup: &WeakSetup<T>,
    sched: &EpsSchedule<T>,
) -> Result<Extrapolation<T>> {
    sched.extrapolate(|e| meter_reading(setup, e))
}

/// `<r, (P_f (x) I) r>`, the probability that postselection succeeds.
pub fn postselection_probability<T: Real>(setup: &WeakSetup<T>, eps: T) -> Result<T> {
    let r = coupled_state(setup, eps)?;
    let x = postselected_meter_vector(&setup.post, &r, setup.dim_meter());
    Ok(x.norm_squared())
}

/// `E_eps(B|f) = <r, (P_f (x) B) r> / <r, (P_f (x) I) r>`, not divided
/// by `eps`.
pub fn conditional_expectation<T: Real>(setup: &WeakSetup<T>, eps: T) -> Result<T> {
    require_positive(eps)?;
    let r = coupled_state(setup, eps)?;
    let x = postselected_meter_vector(&setup.post, &r, setup.dim_meter());
    let p = x.norm_squared();
    if p < T::lit(MIN_POSTSELECTION_PROB) {
        return Err(Error::EmptyPostselection {
            probability: p.as_f64(),
        });
    }
    let bx = setup.meter.observable().matrix() * &x;
    Ok(x.dotc(&bx).re / p)
}

/// The weak value `NE(B|f) = lim E_eps(B|f) / eps`, extrapolated over the
/// schedule.
pub fn weak_value_numeric<T: Real>(
    setup: &WeakSetup<T>,
    sched: &EpsSchedule<T>,
) -> Result<Extrapolation<T>> {
    setup.require_overlap()?;
    sched.extrapolate(|e| Ok(conditional_expectation(setup, e)? / e))
}

/// `<f, A s> / <f, s>`.
pub fn aav_complex_weak_value<T: Real>(
    a: &Observable<T>,
    s: &StateVector<T>,
    f: &StateVector<T>,
) -> Result<C<T>> {
    let ov = require_overlap(s, f)?;
    Ok(f.inner(&a.apply(s)?)? / ov)
}

/// `Re(<f, A s> / <f, s>)`.
pub fn traditional_weak_value<T: Real>(
    a: &Observable<T>,
    s: &StateVector<T>,
    f: &StateVector<T>,
) -> Result<T> {
    Ok(aav_complex_weak_value(a, s, f)?.re)
}

/// `NE(B|f) = 2 Im(<f, A s> <m, BG m> / <f, s>)`.
///
/// Writing `<m, BG m> = rho + i/2` for a calibrated meter this is
/// `Re(w) + 2 rho Im(w)` with `w` the complex ratio, so `rho` shifts the
/// answer arbitrarily whenever `Im(w) != 0`.
pub fn weak_value_closed_form<T: Real>(setup: &WeakSetup<T>) -> Result<T> {
    let w = aav_complex_weak_value(&setup.observable, &setup.pre, &setup.post)?;
    Ok((w * setup.meter.coupling_moment()).im * T::lit(2.0))
}

/// Conditional mean of a projective measurement of `A` on `s` given that
/// a subsequent postselection to `f` succeeds.
///
/// Eigenspace `i` is reached with probability `|P_i s|^2` and leaves the
/// system in `P_i s / |P_i s|`, after which `f` is found with probability
/// `|<f, P_i s>|^2 / |P_i s|^2`; the weights are therefore
/// `w_i = |<f, P_i s>|^2` and the result is a convex combination of the
/// eigenvalues.
pub fn projective_conditional_expectation<T: Real>(
    a: &Observable<T>,
    s: &StateVector<T>,
    f: &StateVector<T>,
) -> Result<T> {
    check_dim(a.dim(), s.dim())?;
    check_dim(a.dim(), f.dim())?;
    let spec = a.spectrum();
    let (mut num, mut den) = (T::zero(), T::zero());
    for g in 0..spec.groups().len() {
        let w = f.inner(&spec.project(g, s)?)?.norm_sqr();
        num += spec.group_value(g) * w;
        den += w;
    }
    if den < T::lit(MIN_POSTSELECTION_PROB) {
        return Err(Error::EmptyPostselection {
            probability: den.as_f64(),
        });
    }
    Ok(num / den)
}

/// Trace distance between `P_s` and the system state after one complete
/// meter readout at coupling `eps`.
///
/// Each eigenspace `Q` of `B` is a branch: the composite is projected by
/// `I (x) P_Q`, renormalized, reduced to the system, and the branches are
/// mixed with their Born weights.
pub fn disturbance<T: Real>(setup: &WeakSetup<T>, eps: T) -> Result<T> {
    let r = coupled_state(setup, eps)?;
    let (ds, dm) = (setup.dim_system(), setup.dim_meter());
    let spec = setup.meter.observable().spectrum();
    let blocks: Vec<DVector<C<T>>> = (0..ds).map(|i| block(r.as_vector(), i, dm)).collect();
    let mut acc = nalgebra::DMatrix::<C<T>>::zeros(ds, ds);
    for g in 0..spec.groups().len() {
        let mut branch = DVector::<C<T>>::zeros(ds * dm);
        for (i, b) in blocks.iter().enumerate() {
            branch
                .rows_mut(i * dm, dm)
                .copy_from(&spec.project_vec(g, b));
        }
        let weight = branch.norm_squared();
        if weight == T::zero() {
            continue;
        }
        // weight * tr_M(P_{branch/|branch|}) = tr_M |branch><branch|
        acc += partial_trace_pure_unnormalized(&branch, ds, dm);
    }
    let after = DensityMatrix::new(acc)?;
    after.trace_distance(&DensityMatrix::from_pure(&setup.pre)?)
}

/// Every value the protocol attaches to one setup.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakValueReport<T: Real> {
    pub numeric: Extrapolation<T>,
    pub closed_form: T,
    pub traditional: T,
    pub aav_complex: C<T>,
    pub projective_conditional: T,
    /// `Re<m, BG m>` of the meter in use.
    pub rho_effective: T,
    /// `<s, A s>`.
    pub expectation: T,
}

impl<T: Real> WeakValueReport<T> {
    /// `|numeric - closed_form|`.
    pub fn discrepancy(&self) -> T {
        (self.numeric.value - self.closed_form).abs()
    }
}

pub fn weak_value_report<T: Real>(
    setup: &WeakSetup<T>,
    sched: &EpsSchedule<T>,
) -> Result<WeakValueReport<T>> {
    let (a, s, f) = (&setup.observable, &setup.pre, &setup.post);
    Ok(WeakValueReport {
        numeric: weak_value_numeric(setup, sched)?,
        closed_form: weak_value_closed_form(setup)?,
        traditional: traditional_weak_value(a, s, f)?,
        aav_complex: aav_complex_weak_value(a, s, f)?,
        projective_conditional: projective_conditional_expectation(a, s, f)?,
        rho_effective: setup.meter.rho(),
        expectation: expectation(a, s)?,
    })
}
