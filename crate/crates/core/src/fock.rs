//! Truncated Fock-basis substrate: ladder and quadrature operators, unitary
//! synthesis from Hermitian generators, and state metrics.
//!
//! Conventions: `X = (a† + a)/2` and `P = i(a† − a)/2`, so `[X, P] = i/2` and
//! the vacuum variance of either quadrature is 1/4.
//!
//! Two-mode vectors are flattened mode-1-major: the amplitude of `|i⟩₁|j⟩₂`
//! lives at index `i·d₂ + j`. Modes are labelled 1 and 2 throughout.

use std::ops::{Add, Mul, Sub};

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, cx, real, Real};

/// Tolerance used when validating user-supplied density matrices.
const DENSITY_TOL: f64 = 1e-9;
/// Smallest eigenvalue a density matrix may have before it is rejected.
const POSITIVITY_TOL: f64 = 1e-8;

/// Mode structure of a truncated Fock space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dims {
    Single(usize),
    Two(usize, usize),
}

impl Dims {
    pub fn total(&self) -> usize {
        match *self {
            Dims::Single(d) => d,
            Dims::Two(d1, d2) => d1 * d2,
        }
    }

    pub fn mode_count(&self) -> usize {
        match self {
            Dims::Single(_) => 1,
            Dims::Two(..) => 2,
        }
    }

    /// Cutoff of a mode, labelled from 1.
    pub fn cutoff(&self, mode: usize) -> Result<usize> {
        match (*self, mode) {
            (Dims::Single(d), 1) => Ok(d),
            (Dims::Two(d1, _), 1) => Ok(d1),
            (Dims::Two(_, d2), 2) => Ok(d2),
            _ => Err(Error::InvalidDimension(format!(
                "mode {mode} does not exist in a {}-mode space",
                self.mode_count()
            ))),
        }
    }

    pub fn cutoffs(&self) -> Vec<usize> {
        match *self {
            Dims::Single(d) => vec![d],
            Dims::Two(d1, d2) => vec![d1, d2],
        }
    }

    /// Every cutoff multiplied by `factor`, rounded up.
    pub fn scaled(&self, factor: f64) -> Dims {
        let s = |d: usize| (d as f64 * factor).ceil() as usize;
        match *self {
            Dims::Single(d) => Dims::Single(s(d)),
            Dims::Two(d1, d2) => Dims::Two(s(d1), s(d2)),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.cutoffs().contains(&0) {
            return Err(Error::InvalidDimension("cutoffs must be positive".into()));
        }
        Ok(())
    }
}

/// Pure state in the truncated number basis, one or two modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector<T: Real> {
    amplitudes: DVector<Complex<T>>,
    dims: Dims,
}

impl<T: Real> FockVector<T> {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(amplitudes: DVector<Complex<T>>, dims: Dims) -> Result<Self> {
        dims.validate()?;
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::Domain("state has zero or non-finite norm".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
            dims,
        })
    }

    /// Number state `|level⟩` of a single mode.
    pub fn basis(level: usize, cutoff: usize) -> Result<Self> {
        if level >= cutoff {
            return Err(Error::LevelOutOfRange { level, cutoff });
        }
        let mut amps = DVector::zeros(cutoff);
        amps[level] = Complex::new(T::one(), T::zero());
        Ok(Self {
            amplitudes: amps,
            dims: Dims::Single(cutoff),
        })
    }

    /// Tensor product `|first⟩₁ ⊗ |second⟩₂` of two single-mode states.
    pub fn product(first: &Self, second: &Self) -> Result<Self> {
        let (Dims::Single(d1), Dims::Single(d2)) = (first.dims, second.dims) else {
            return Err(Error::InvalidDimension(
                "tensor product needs two single-mode factors".into(),
            ));
        };
        let amps = DVector::from_fn(d1 * d2, |k, _| first.amplitudes[k / d2] * second.amplitudes[k % d2]);
        Ok(Self {
            amplitudes: amps,
            dims: Dims::Two(d1, d2),
        })
    }

    /// Wraps amplitudes that are already normalized up to roundoff.
    pub(crate) fn from_parts(amplitudes: DVector<Complex<T>>, dims: Dims) -> Self {
        debug_assert_eq!(amplitudes.len(), dims.total());
        Self { amplitudes, dims }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.same_dims(other.dims)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²`
    pub fn overlap_probability(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn expectation(&self, op: &ModeOperator<T>) -> Result<Complex<T>> {
        if op.cutoff() != self.dims.total() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.total(),
                found: op.cutoff(),
            });
        }
        Ok(self.amplitudes.dotc(&(&op.entries * &self.amplitudes)))
    }

    pub fn to_density(&self) -> DensityMatrix<T> {
        DensityMatrix {
            entries: &self.amplitudes * self.amplitudes.adjoint(),
            dims: self.dims,
        }
    }

    /// Photon-number distribution of one mode (marginal for two-mode states).
    pub fn number_distribution(&self, mode: usize) -> Result<Vec<T>> {
        let d = self.dims.cutoff(mode)?;
        let mut probs = vec![T::zero(); d];
        match self.dims {
            Dims::Single(_) => {
                for (p, a) in probs.iter_mut().zip(self.amplitudes.iter()) {
                    *p = a.norm_sqr();
                }
            }
            Dims::Two(_, d2) => {
                for (k, a) in self.amplitudes.iter().enumerate() {
                    let level = if mode == 1 { k / d2 } else { k % d2 };
                    probs[level] += a.norm_sqr();
                }
            }
        }
        Ok(probs)
    }

    /// Probability held in the top `fraction` of Fock levels, per mode.
    pub fn top_weight(&self, fraction: T) -> Vec<T> {
        (1..=self.dims.mode_count())
            .map(|mode| {
                let probs = self.number_distribution(mode).expect("mode exists by construction");
                let d = probs.len();
                let top = (fraction * T::count(d)).ceil().to_usize().unwrap_or(1).clamp(1, d);
                probs[d - top..].iter().fold(T::zero(), |acc, &p| acc + p)
            })
            .collect()
    }

    /// Amplitudes arranged as a `d₁ × d₂` matrix (`d × 1` for one mode).
    pub fn as_mode_matrix(&self) -> DMatrix<Complex<T>> {
        match self.dims {
            Dims::Single(d) => DMatrix::from_column_slice(d, 1, self.amplitudes.as_slice()),
            Dims::Two(d1, d2) => DMatrix::from_fn(d1, d2, |i, j| self.amplitudes[i * d2 + j]),
        }
    }

    pub(crate) fn from_mode_matrix(m: &DMatrix<Complex<T>>, dims: Dims) -> Self {
        let amplitudes = match dims {
            Dims::Single(d) => DVector::from_fn(d, |i, _| m[(i, 0)]),
            Dims::Two(d1, d2) => {
                debug_assert_eq!((m.nrows(), m.ncols()), (d1, d2));
                DVector::from_fn(d1 * d2, |k, _| m[(k / d2, k % d2)])
            }
        };
        Self { amplitudes, dims }
    }

    /// Keeps the lowest `cutoff` levels of a single-mode state and
    /// renormalizes. Returns the state and the discarded probability.
    pub fn truncated(&self, cutoff: usize) -> Result<(Self, T)> {
        let Dims::Single(d) = self.dims else {
            return Err(Error::InvalidDimension("truncation expects a single mode".into()));
        };
        if cutoff == 0 || cutoff > d {
            return Err(Error::InvalidDimension(format!(
                "cannot truncate a cutoff-{d} state to {cutoff} levels"
            )));
        }
        let kept = self.amplitudes.rows(0, cutoff).into_owned();
        let discarded = T::one() - kept.norm_squared();
        let state = Self::new(kept, Dims::Single(cutoff))?;
        Ok((state, discarded.max(T::zero())))
    }

    fn same_dims(&self, other: Dims) -> Result<()> {
        if self.dims != other {
            return Err(Error::DimensionMismatch {
                expected: self.dims.total(),
                found: other.total(),
            });
        }
        Ok(())
    }
}

/// Mixed state as a Hermitian, unit-trace, positive matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    entries: DMatrix<Complex<T>>,
    dims: Dims,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(entries: DMatrix<Complex<T>>, dims: Dims) -> Result<Self> {
        dims.validate()?;
        if entries.nrows() != dims.total() || entries.ncols() != dims.total() {
            return Err(Error::DimensionMismatch {
                expected: dims.total(),
                found: entries.nrows(),
            });
        }
        let tol = T::lit(DENSITY_TOL).max(T::structural_tol());
        let deviation = hermitian_deviation(&entries);
        if deviation > tol {
            return Err(Error::NotHermitian {
                deviation: deviation.to_f64_lossy(),
            });
        }
        let trace = entries.trace();
        if (trace - real(T::one())).modulus() > tol {
            return Err(Error::Domain(format!(
                "density matrix trace {} differs from 1",
                trace.re
            )));
        }
        let rho = Self { entries, dims };
        let lowest = rho.min_eigenvalue();
        if lowest < -T::lit(POSITIVITY_TOL).max(T::structural_tol()) {
            return Err(Error::Domain(format!(
                "density matrix has negative eigenvalue {lowest:e}"
            )));
        }
        Ok(rho)
    }

    pub fn from_pure(state: &FockVector<T>) -> Self {
        state.to_density()
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn trace(&self) -> T {
        self.entries.trace().re
    }

    /// `Tr(ρ²)`
    pub fn purity(&self) -> T {
        trace_of_product(&self.entries, &self.entries).re
    }

    pub fn expectation(&self, op: &ModeOperator<T>) -> Result<Complex<T>> {
        if op.cutoff() != self.dims.total() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.total(),
                found: op.cutoff(),
            });
        }
        Ok(trace_of_product(&self.entries, &op.entries))
    }

    /// `⟨ψ|ρ|ψ⟩`, equal to `Tr(ρ·|ψ⟩⟨ψ|)` without forming the projector.
    pub fn pure_overlap(&self, psi: &FockVector<T>) -> Result<T> {
        if psi.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.total(),
                found: psi.dims().total(),
            });
        }
        Ok(psi.amplitudes.dotc(&(&self.entries * &psi.amplitudes)).re)
    }

    pub fn min_eigenvalue(&self) -> T {
        let herm = hermitian_part(&self.entries);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b))
    }
}

/// Square complex matrix on a truncated Fock space (one mode, or the full
/// `d₁·d₂` two-mode space).
#[derive(Clone, Debug, PartialEq)]
pub struct ModeOperator<T: Real> {
    entries: DMatrix<Complex<T>>,
    hermitian: bool,
}

impl<T: Real> ModeOperator<T> {
    /// Operator flagged Hermitian; rejected if `entries ≠ entries†` beyond roundoff.
    pub fn hermitian(entries: DMatrix<Complex<T>>) -> Result<Self> {
        check_square(&entries)?;
        let deviation = hermitian_deviation(&entries);
        let scale = max_abs(&entries).max(T::one());
        if deviation > T::structural_tol() * scale {
            return Err(Error::NotHermitian {
                deviation: deviation.to_f64_lossy(),
            });
        }
        Ok(Self {
            entries,
            hermitian: true,
        })
    }

    pub fn general(entries: DMatrix<Complex<T>>) -> Result<Self> {
        check_square(&entries)?;
        Ok(Self {
            entries,
            hermitian: false,
        })
    }

    pub fn identity(cutoff: usize) -> Self {
        Self {
            entries: DMatrix::identity(cutoff, cutoff),
            hermitian: true,
        }
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex<T>> {
        self.entries
    }

    /// Dimension of the space the operator acts on.
    pub fn cutoff(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// `(A + A†)/2`, flagged Hermitian. Removes roundoff asymmetry from
    /// products of Hermitian factors such as `X·X·X`.
    pub fn hermitian_part(&self) -> Self {
        Self {
            entries: hermitian_part(&self.entries),
            hermitian: true,
        }
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        let hermitian = self.hermitian && factor.im == T::zero();
        Self {
            entries: &self.entries * factor,
            hermitian,
        }
    }

    /// Kronecker product `self ⊗ other` in mode-1-major order.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            entries: self.entries.kronecker(&other.entries),
            hermitian: self.hermitian && other.hermitian,
        }
    }

    /// Lifts a single-mode operator onto `mode` of a two-mode space.
    pub fn on_mode(&self, mode: usize, dims: Dims) -> Result<Self> {
        let d = dims.cutoff(mode)?;
        if d != self.cutoff() {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.cutoff(),
            });
        }
        Ok(match (dims, mode) {
            (Dims::Single(_), _) => self.clone(),
            (Dims::Two(_, d2), 1) => self.kron(&Self::identity(d2)),
            (Dims::Two(d1, _), _) => Self::identity(d1).kron(self),
        })
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.entries)
    }

    /// Largest entrywise deviation restricted to the first `levels` basis states.
    pub fn max_abs_diff_on(&self, other: &Self, levels: usize) -> Result<T> {
        if self.cutoff() != other.cutoff() {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff(),
                found: other.cutoff(),
            });
        }
        let n = levels.min(self.cutoff());
        let a = self.entries.view((0, 0), (n, n));
        let b = other.entries.view((0, 0), (n, n));
        Ok((a - b).iter().fold(T::zero(), |m, z| m.max(z.modulus())))
    }
}

impl<T: Real> Mul for &ModeOperator<T> {
    type Output = ModeOperator<T>;

    fn mul(self, rhs: Self) -> ModeOperator<T> {
        ModeOperator {
            entries: &self.entries * &rhs.entries,
            hermitian: false,
        }
    }
}

impl<T: Real> Add for &ModeOperator<T> {
    type Output = ModeOperator<T>;

    fn add(self, rhs: Self) -> ModeOperator<T> {
        ModeOperator {
            entries: &self.entries + &rhs.entries,
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl<T: Real> Sub for &ModeOperator<T> {
    type Output = ModeOperator<T>;

    fn sub(self, rhs: Self) -> ModeOperator<T> {
        ModeOperator {
            entries: &self.entries - &rhs.entries,
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

/// `[a, b] = ab − ba`
pub fn commutator<T: Real>(a: &ModeOperator<T>, b: &ModeOperator<T>) -> ModeOperator<T> {
    &(a * b) - &(b * a)
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::InvalidDimension(format!(
            "cutoff must be at least 2, got {cutoff}"
        )));
    }
    Ok(())
}

/// Annihilation and creation operators: `⟨n−1|a|n⟩ = √n`.
pub fn ladder<T: Real>(cutoff: usize) -> Result<(ModeOperator<T>, ModeOperator<T>)> {
    check_cutoff(cutoff)?;
    let a = DMatrix::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            real(T::count(j).sqrt())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    let ad = a.adjoint();
    Ok((
        ModeOperator {
            entries: a,
            hermitian: false,
        },
        ModeOperator {
            entries: ad,
            hermitian: false,
        },
    ))
}

/// Number operator `a†a = diag(0, 1, …, d−1)`.
pub fn number<T: Real>(cutoff: usize) -> Result<ModeOperator<T>> {
    check_cutoff(cutoff)?;
    let diag = DVector::from_fn(cutoff, |n, _| real(T::count(n)));
    Ok(ModeOperator {
        entries: DMatrix::from_diagonal(&diag),
        hermitian: true,
    })
}

/// `X = (a† + a)/2` and `P = i(a† − a)/2`.
pub fn quadratures<T: Real>(cutoff: usize) -> Result<(ModeOperator<T>, ModeOperator<T>)> {
    let (a, ad) = ladder::<T>(cutoff)?;
    let half = real(T::lit(0.5));
    let x = (&ad.entries + &a.entries) * half;
    let p = (&ad.entries - &a.entries) * cx(T::zero(), T::lit(0.5));
    Ok((
        ModeOperator {
            entries: x,
            hermitian: true,
        },
        ModeOperator {
            entries: p,
            hermitian: true,
        },
    ))
}

/// Eigendecomposition `H = V·diag(λ)·V†` of a Hermitian generator.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    values: DVector<T>,
    vectors: DMatrix<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn of(generator: &ModeOperator<T>) -> Result<Self> {
        if !generator.hermitian {
            return Err(Error::NotHermitian {
                deviation: hermitian_deviation(&generator.entries).to_f64_lossy(),
            });
        }
        let eig = generator.entries.clone().symmetric_eigen();
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn values(&self) -> &DVector<T> {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<Complex<T>> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Dense `e^{i·scale·H}`.
    pub fn exp_i(&self, scale: T) -> ModeOperator<T> {
        let phases = self.values.map(|v| cis(scale * v));
        let mut scaled = self.vectors.clone();
        for (mut col, ph) in scaled.column_iter_mut().zip(phases.iter()) {
            col *= *ph;
        }
        ModeOperator {
            entries: scaled * self.vectors.adjoint(),
            hermitian: false,
        }
    }

    /// Left-multiplies `target` (columns are states) by `e^{i·scale·H}`
    /// without forming the dense unitary.
    pub fn apply_exp_i(&self, scale: T, target: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        let mut coeffs = self.vectors.adjoint() * target;
        for (i, mut row) in coeffs.row_iter_mut().enumerate() {
            row *= cis(scale * self.values[i]);
        }
        &self.vectors * coeffs
    }
}

/// `e^{i·scale·generator}` via Hermitian eigendecomposition.
pub fn synthesize_unitary<T: Real>(generator: &ModeOperator<T>, scale: T) -> Result<ModeOperator<T>> {
    Ok(Spectrum::of(generator)?.exp_i(scale))
}

/// `‖U†U − I‖_max`
pub fn unitarity_defect<T: Real>(u: &ModeOperator<T>) -> T {
    let d = u.cutoff();
    let gram = u.entries.adjoint() * &u.entries;
    max_abs(&(gram - DMatrix::identity(d, d)))
}

/// `Tr(AB)`, the overlap measure used for all fidelity reports. Equals the
/// Uhlmann fidelity only when one argument is pure.
pub fn fidelity<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T> {
    if a.dims.total() != b.dims.total() {
        return Err(Error::DimensionMismatch {
            expected: a.dims.total(),
            found: b.dims.total(),
        });
    }
    Ok(trace_of_product(&a.entries, &b.entries).re)
}

/// States that can be reduced and measured.
pub trait QuantumState<T: Real> {
    fn dims(&self) -> Dims;

    fn expectation(&self, op: &ModeOperator<T>) -> Result<Complex<T>>;

    /// Reduced density matrix of mode 2 after tracing out mode 1.
    fn reduce_to_second_mode(&self) -> Result<DensityMatrix<T>>;
}

impl<T: Real> QuantumState<T> for FockVector<T> {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn expectation(&self, op: &ModeOperator<T>) -> Result<Complex<T>> {
        FockVector::expectation(self, op)
    }

    fn reduce_to_second_mode(&self) -> Result<DensityMatrix<T>> {
        let Dims::Two(_, d2) = self.dims else {
            return Err(Error::InvalidDimension("partial trace needs a two-mode state".into()));
        };
        let psi = self.as_mode_matrix();
        // ρ₂[j,k] = Σᵢ ψ[i,j]·ψ[i,k]*
        let rho = psi.transpose() * psi.conjugate();
        Ok(DensityMatrix {
            entries: hermitian_part(&rho),
            dims: Dims::Single(d2),
        })
    }
}

impl<T: Real> QuantumState<T> for DensityMatrix<T> {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn expectation(&self, op: &ModeOperator<T>) -> Result<Complex<T>> {
        DensityMatrix::expectation(self, op)
    }

    fn reduce_to_second_mode(&self) -> Result<DensityMatrix<T>> {
        let Dims::Two(d1, d2) = self.dims else {
            return Err(Error::InvalidDimension("partial trace needs a two-mode state".into()));
        };
        let rho = DMatrix::from_fn(d2, d2, |j, k| {
            (0..d1).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
                acc + self.entries[(i * d2 + j, i * d2 + k)]
            })
        });
        Ok(DensityMatrix {
            entries: rho,
            dims: Dims::Single(d2),
        })
    }
}

/// Reduced state of mode 2.
pub fn partial_trace_first_mode<T: Real, S: QuantumState<T>>(state: &S) -> Result<DensityMatrix<T>> {
    state.reduce_to_second_mode()
}

/// Mean and variance of a quadrature (any Hermitian observable).
pub fn quadrature_statistics<T: Real, S: QuantumState<T>>(state: &S, quadrature: &ModeOperator<T>) -> Result<(T, T)> {
    let mean = state.expectation(quadrature)?.re;
    let second = state.expectation(&(quadrature * quadrature))?.re;
    Ok((mean, second - mean * mean))
}

fn check_square<T: Real>(m: &DMatrix<Complex<T>>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidDimension(format!(
            "operator must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn max_abs<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

fn hermitian_deviation<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    max_abs(&(m - m.adjoint()))
}

fn hermitian_part<T: Real>(m: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    (m + m.adjoint()) * real(T::lit(0.5))
}

fn trace_of_product<T: Real>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>) -> Complex<T> {
    // Σᵢⱼ Aᵢⱼ Bⱼᵢ without forming AB.
    a.component_mul(&b.transpose()).sum()
}
