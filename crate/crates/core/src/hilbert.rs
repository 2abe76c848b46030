//! Finite-dimensional complex Hilbert spaces: pure states, Hermitian
//! observables, tensor products, spectral calculus and partial traces.
//!
//! Composite spaces use system-major ordering: the amplitude of
//! `|i_S> (x) |i_M>` lives at index `i_S * dim_M + i_M`, so tracing out the
//! meter sums contiguous blocks.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{c, c_re, phase, Real, C};

/// Relative Hermiticity tolerance applied when an observable is built.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative gap under which neighbouring eigenvalues share an eigenspace.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Largest imaginary residue tolerated in an expectation value.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-10;
/// Density matrices must be Hermitian, trace one and positive to this.
pub const DENSITY_TOL: f64 = 1e-10;

/// A vector in `C^dim`.
///
/// [`StateVector::new`] normalizes; [`StateVector::raw`] keeps the norm,
/// which is what projected (unnormalized) intermediate states need.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    amps: DVector<C<T>>,
}

impl<T: Real> StateVector<T> {
    /// Normalized state with the direction of `amps`.
    pub fn new(amps: Vec<C<T>>) -> Result<Self> {
        Self::raw(amps)?.normalized()
    }

    /// Normalized state from real amplitudes.
    pub fn from_real(amps: &[T]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| c_re(a)).collect())
    }

    /// Unnormalized vector; only emptiness is rejected.
    pub fn raw(amps: Vec<C<T>>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::EmptyState);
        }
        Ok(Self {
            amps: DVector::from_vec(amps),
        })
    }

    /// The `k`-th standard basis vector of `C^dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amps = DVector::zeros(dim);
        amps[k] = C::new(T::one(), T::zero());
        Self { amps }
    }

    pub(crate) fn from_dvector(amps: DVector<C<T>>) -> Self {
        debug_assert!(!amps.is_empty());
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C<T>] {
        self.amps.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<C<T>> {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= T::zero() || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            amps: self.amps.unscale(n),
        })
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - T::one()).abs() <= T::tol(tol)
    }

    /// `<self, other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Kronecker product `self (x) other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let dm = other.dim();
        let amps = DVector::from_fn(self.dim() * dm, |k, _| {
            self.amps[k / dm] * other.amps[k % dm]
        });
        Self { amps }
    }

    pub fn scaled(&self, z: C<T>) -> Self {
        Self {
            amps: &self.amps * z,
        }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            amps: self.amps.map(|a| a.conj()),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            amps: &self.amps - &other.amps,
        })
    }
}

pub fn inner<T: Real>(v: &StateVector<T>, w: &StateVector<T>) -> Result<C<T>> {
    v.inner(w)
}

pub fn tensor_state<T: Real>(s: &StateVector<T>, m: &StateVector<T>) -> StateVector<T> {
    s.tensor(m)
}

/// A Hermitian operator on `C^dim`.
///
/// Hermiticity is checked at construction and the stored matrix is the
/// symmetrized `(M + M^dagger) / 2`. The eigendecomposition is computed on
/// first use and cached.
#[derive(Clone, Debug)]
pub struct Observable<T: Real> {
    entries: DMatrix<C<T>>,
    spectrum: OnceLock<SpectralDecomposition<T>>,
}

impl<T: Real> PartialEq for Observable<T> {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl<T: Real> Observable<T> {
    pub fn new(entries: DMatrix<C<T>>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let adjoint = entries.adjoint();
        let scale = max_abs(&entries);
        let deviation = max_abs(&(&entries - &adjoint));
        if !(deviation <= T::tol(HERMITIAN_TOL) * scale) {
            return Err(Error::NotHermitian {
                deviation: deviation.as_f64(),
            });
        }
        Ok(Self::from_hermitian_unchecked(
            (entries + adjoint) * c_re(T::lit(0.5)),
        ))
    }

    /// Builds from row-major rows of complex entries.
    pub fn from_rows(rows: &[Vec<C<T>>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub(crate) fn from_hermitian_unchecked(entries: DMatrix<C<T>>) -> Self {
        Self {
            entries,
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| c_re(x)));
        Self::from_hermitian_unchecked(DMatrix::from_diagonal(&d))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_hermitian_unchecked(DMatrix::identity(dim, dim))
    }

    pub fn pauli_x() -> Self {
        let (o, z) = (c_re(T::one()), C::new(T::zero(), T::zero()));
        Self::from_hermitian_unchecked(DMatrix::from_row_slice(2, 2, &[z, o, o, z]))
    }

    pub fn pauli_y() -> Self {
        let z = C::new(T::zero(), T::zero());
        let i = c(T::zero(), T::one());
        Self::from_hermitian_unchecked(DMatrix::from_row_slice(2, 2, &[z, -i, i, z]))
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diagonal(&[T::one(), -T::one()])
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C<T>> {
        &self.entries
    }

    /// `A v` as an unnormalized vector.
    pub fn apply(&self, v: &StateVector<T>) -> Result<StateVector<T>> {
        check_dim(self.dim(), v.dim())?;
        Ok(StateVector::from_dvector(&self.entries * v.as_vector()))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_hermitian_unchecked(self.entries.kronecker(&other.entries))
    }

    pub fn scaled(&self, x: T) -> Self {
        Self::from_hermitian_unchecked(&self.entries * c_re(x))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self::from_hermitian_unchecked(
            &self.entries + &other.entries,
        ))
    }

    /// Cached eigendecomposition.
    pub fn spectrum(&self) -> &SpectralDecomposition<T> {
        self.spectrum
            .get_or_init(|| SpectralDecomposition::of_hermitian(&self.entries))
    }
}

pub fn tensor_op<T: Real>(x: &Observable<T>, y: &Observable<T>) -> Observable<T> {
    x.tensor(y)
}

/// Eigenvalues in ascending order, an orthonormal eigenbasis, and the
/// partition of that basis into eigenspaces.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<T: Real> {
    eigenvalues: Vec<T>,
    /// Columns are the eigenvectors, in eigenvalue order.
    basis: DMatrix<C<T>>,
    groups: Vec<Vec<usize>>,
}

impl<T: Real> SpectralDecomposition<T> {
    fn of_hermitian(entries: &DMatrix<C<T>>) -> Self {
        let n = entries.nrows();
        let eig = entries.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let eigenvalues: Vec<T> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let basis = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);

        let radius = eigenvalues.iter().fold(
            T::one(),
            |acc, &l| if l.abs() > acc { l.abs() } else { acc },
        );
        let gap = T::tol(DEGENERACY_TOL) * radius;
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (k, &l) in eigenvalues.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if l - eigenvalues[*g.last().unwrap()] <= gap => g.push(k),
                _ => groups.push(vec![k]),
            }
        }
        Self {
            eigenvalues,
            basis,
            groups,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> StateVector<T> {
        StateVector::from_dvector(self.basis.column(k).into_owned())
    }

    pub fn eigenvectors(&self) -> Vec<StateVector<T>> {
        (0..self.dim()).map(|k| self.eigenvector(k)).collect()
    }

    pub fn basis(&self) -> &DMatrix<C<T>> {
        &self.basis
    }

    /// Index sets of the eigenspaces, ascending in eigenvalue.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Representative eigenvalue of eigenspace `g` (mean of its members).
    pub fn group_value(&self, g: usize) -> T {
        let idx = &self.groups[g];
        let sum = idx
            .iter()
            .fold(T::zero(), |acc, &k| acc + self.eigenvalues[k]);
        sum / T::from_usize(idx.len()).unwrap()
    }

    /// `P_g v` for the projector onto eigenspace `g`.
    pub fn project(&self, g: usize, v: &StateVector<T>) -> Result<StateVector<T>> {
        check_dim(self.dim(), v.dim())?;
        Ok(StateVector::from_dvector(
            self.project_vec(g, v.as_vector()),
        ))
    }

    pub(crate) fn project_vec(&self, g: usize, v: &DVector<C<T>>) -> DVector<C<T>> {
        let mut out = DVector::zeros(v.len());
        for &k in &self.groups[g] {
            let col = self.basis.column(k);
            let coeff = col.dotc(v);
            out.axpy(coeff, &col, c_re(T::one()));
        }
        out
    }

    /// `f(A) v = sum_j f(lambda_j) <a_j, v> a_j`.
    pub fn apply_fn(&self, f: impl Fn(T) -> C<T>, v: &StateVector<T>) -> Result<StateVector<T>> {
        check_dim(self.dim(), v.dim())?;
        Ok(StateVector::from_dvector(
            self.apply_fn_vec(f, v.as_vector()),
        ))
    }

    pub(crate) fn apply_fn_vec(&self, f: impl Fn(T) -> C<T>, v: &DVector<C<T>>) -> DVector<C<T>> {
        let mut coeffs = self.basis.ad_mul(v);
        for (k, z) in coeffs.iter_mut().enumerate() {
            *z *= f(self.eigenvalues[k]);
        }
        &self.basis * coeffs
    }

    /// `sum_j lambda_j P_{a_j}`.
    pub fn reconstruct(&self) -> DMatrix<C<T>> {
        let mut scaled = self.basis.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= c_re(self.eigenvalues[k]);
        }
        scaled * self.basis.adjoint()
    }
}

pub fn eig_hermitian<T: Real>(a: &Observable<T>) -> SpectralDecomposition<T> {
    a.spectrum().clone()
}

/// `e^{-i eps H} v` by spectral calculus.
pub fn evolve<T: Real>(h: &Observable<T>, eps: T, v: &StateVector<T>) -> Result<StateVector<T>> {
    if eps == T::zero() {
        check_dim(h.dim(), v.dim())?;
        return Ok(v.clone());
    }
    h.spectrum().apply_fn(|l| phase(eps * l), v)
}

/// `e^{-i eps (A (x) G)} v` through the factorization
/// `sum_j P_{a_j} (x) e^{-i eps alpha_j G}`; only `A` and `G` are
/// diagonalized, never the composite.
pub fn evolve_coupling<T: Real>(
    a: &Observable<T>,
    g: &Observable<T>,
    eps: T,
    v: &StateVector<T>,
) -> Result<StateVector<T>> {
    let (ds, dm) = (a.dim(), g.dim());
    check_dim(ds * dm, v.dim())?;
    if eps == T::zero() {
        return Ok(v.clone());
    }
    let sa = a.spectrum();
    let sg = g.spectrum();
    let amps = v.as_vector();
    let mut out = DVector::<C<T>>::zeros(ds * dm);
    for k in 0..ds {
        let ak = sa.basis.column(k);
        // (<a_k| (x) I) v
        let mut block = DVector::<C<T>>::zeros(dm);
        for i in 0..ds {
            let w = ak[i].conj();
            if w.norm_sqr() == T::zero() {
                continue;
            }
            block.axpy(w, &amps.rows(i * dm, dm), c_re(T::one()));
        }
        let alpha = sa.eigenvalues[k];
        let evolved = sg.apply_fn_vec(|l| phase(eps * alpha * l), &block);
        for i in 0..ds {
            let w = ak[i];
            if w.norm_sqr() == T::zero() {
                continue;
            }
            let mut rows = out.rows_mut(i * dm, dm);
            rows.axpy(w, &evolved, c_re(T::one()));
        }
    }
    Ok(StateVector::from_dvector(out))
}

/// Orthogonal projector onto the span of `w`; `P_w = P_{w/|w|}`.
pub fn projector<T: Real>(w: &StateVector<T>) -> Result<Observable<T>> {
    let u = w.normalized()?;
    let v = u.as_vector();
    Ok(Observable::from_hermitian_unchecked(v * v.adjoint()))
}

/// `<v, A v>`, rejecting a non-negligible imaginary residue.
pub fn expectation<T: Real>(a: &Observable<T>, v: &StateVector<T>) -> Result<T> {
    let raw = v.inner(&a.apply(v)?)?;
    let scale = max_abs(a.matrix()).max(T::one()) * v.norm_sqr().max(T::one());
    if raw.im.abs() > T::tol(EXPECTATION_IMAG_TOL) * scale {
        return Err(Error::ComplexExpectation {
            imag: raw.im.as_f64(),
        });
    }
    Ok(raw.re)
}

/// A positive, unit-trace Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    entries: DMatrix<C<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(entries: DMatrix<C<T>>) -> Result<Self> {
        let obs = Observable::new(entries).map_err(|e| Error::InvalidDensity(e.to_string()))?;
        let tol = T::tol(DENSITY_TOL);
        let tr = obs.matrix().trace();
        if (tr.re - T::one()).abs() > tol {
            return Err(Error::InvalidDensity(format!(
                "trace {} differs from 1",
                tr.re.as_f64()
            )));
        }
        let min = obs.spectrum().eigenvalues()[0];
        if min < -tol {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {}",
                min.as_f64()
            )));
        }
        Ok(Self {
            entries: obs.entries,
        })
    }

    /// `P_v` for the direction of `v`.
    pub fn from_pure(v: &StateVector<T>) -> Result<Self> {
        Ok(Self {
            entries: projector(v)?.entries,
        })
    }

    /// `sum_k w_k rho_k`; weights must be nonnegative and sum to one.
    pub fn mixture(parts: &[(T, DensityMatrix<T>)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyState)?;
        let n = first.1.dim();
        let mut acc = DMatrix::zeros(n, n);
        for (w, rho) in parts {
            check_dim(n, rho.dim())?;
            acc += &rho.entries * c_re(*w);
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C<T>> {
        &self.entries
    }

    pub fn trace(&self) -> T {
        self.entries.trace().re
    }

    pub fn min_eigenvalue(&self) -> T {
        Observable::from_hermitian_unchecked(self.entries.clone())
            .spectrum()
            .eigenvalues()[0]
    }

    pub fn partial_trace_meter(&self, dim_s: usize, dim_m: usize) -> Result<Self> {
        partial_trace_meter(self, dim_s, dim_m)
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        check_dim(self.dim(), other.dim())?;
        let diff = Observable::from_hermitian_unchecked(&self.entries - &other.entries);
        let sum = diff
            .spectrum()
            .eigenvalues()
            .iter()
            .fold(T::zero(), |acc, l| acc + l.abs());
        Ok(sum * T::lit(0.5))
    }
}

/// `tr_M rho` for `rho` on `S (x) M`.
pub fn partial_trace_meter<T: Real>(
    rho: &DensityMatrix<T>,
    dim_s: usize,
    dim_m: usize,
) -> Result<DensityMatrix<T>> {
    check_dim(dim_s * dim_m, rho.dim())?;
    let r = &rho.entries;
    let out = DMatrix::from_fn(dim_s, dim_s, |i, j| {
        (0..dim_m).fold(C::new(T::zero(), T::zero()), |acc, m| {
            acc + r[(i * dim_m + m, j * dim_m + m)]
        })
    });
    DensityMatrix::new(out)
}

/// `tr_M |v><v|` without forming the composite matrix. `v` need not be
/// normalized; the result is scaled by `|v|^2` and not validated.
pub(crate) fn partial_trace_pure_unnormalized<T: Real>(
    v: &DVector<C<T>>,
    dim_s: usize,
    dim_m: usize,
) -> DMatrix<C<T>> {
    DMatrix::from_fn(dim_s, dim_s, |i, j| {
        v.rows(j * dim_m, dim_m).dotc(&v.rows(i * dim_m, dim_m))
    })
}

pub(crate) fn max_abs<T: Real>(m: &DMatrix<C<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| {
        let a = z.norm_sqr().sqrt();
        if a > acc {
            a
        } else {
            acc
        }
    })
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
