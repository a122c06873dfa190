//! Constructors for the single-mode states used by the experiments.
//!
//! Coherent and squeezed vacua come from closed-form Fock amplitudes.
//! Displaced and cubic-phase states are built by applying unitaries at a
//! padded working cutoff and truncating, so that truncation artifacts of the
//! generators stay far from the levels that are kept.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, Dims, FockVector, Spectrum};
use crate::gates::{Generator, LeakageGuard};
use crate::scalar::{cx, real, Real};

/// Which state to build and its parameters. `r` is in nepers; complex
/// amplitudes are `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateKind<T> {
    Vacuum,
    Fock {
        n: usize,
    },
    Coherent {
        alpha: [T; 2],
    },
    /// X-squeezed vacuum, X-variance `e^{−2r}/4`.
    SqueezedVacuum {
        r: T,
    },
    /// P-squeezed vacuum, P-variance `e^{−2r}/4`, approximating `|p = 0⟩`.
    PEigenstateApprox {
        r: T,
    },
    /// `D(α)·S(r)|0⟩`
    DisplacedSqueezed {
        r: T,
        alpha: [T; 2],
    },
    /// `e^{itX³}` applied to a P-squeezed vacuum centred at `x = c`, i.e. the
    /// Gaussian-enveloped cubic phase state with envelope `e^{−(x−c)²/e^{2r}}`.
    CubicPhaseMff {
        t: T,
        r: T,
        c: T,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSpec<T> {
    #[serde(flatten)]
    pub kind: StateKind<T>,
    pub cutoff: usize,
}

impl<T: Real> StateSpec<T> {
    pub fn new(kind: StateKind<T>, cutoff: usize) -> Self {
        Self { kind, cutoff }
    }

    fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(Error::InvalidDimension("cutoff must be positive".into()));
        }
        let finite = |xs: &[T]| xs.iter().all(|x| x.is_finite());
        let ok = match self.kind {
            StateKind::Vacuum => true,
            StateKind::Fock { n } => {
                if n >= self.cutoff {
                    return Err(Error::LevelOutOfRange {
                        level: n,
                        cutoff: self.cutoff,
                    });
                }
                true
            }
            StateKind::Coherent { alpha } => finite(&alpha),
            StateKind::SqueezedVacuum { r } | StateKind::PEigenstateApprox { r } => finite(&[r]),
            StateKind::DisplacedSqueezed { r, alpha } => finite(&[r, alpha[0], alpha[1]]),
            StateKind::CubicPhaseMff { t, r, c } => finite(&[t, r, c]),
        };
        if !ok {
            return Err(Error::Domain(format!("non-finite parameter in {:?}", self.kind)));
        }
        Ok(())
    }
}

/// Builds the state described by `spec`, normalized, rejecting it if more
/// than the default leakage threshold sits in its top levels.
pub fn make_state<T: Real>(spec: &StateSpec<T>) -> Result<FockVector<T>> {
    spec.validate()?;
    let d = spec.cutoff;
    match spec.kind {
        StateKind::Vacuum => FockVector::basis(0, d),
        StateKind::Fock { n } => FockVector::basis(n, d),
        StateKind::Coherent { alpha } => guarded(coherent_amplitudes(cx(alpha[0], alpha[1]), d), d),
        StateKind::SqueezedVacuum { r } => guarded(squeezed_amplitudes(r, d), d),
        StateKind::PEigenstateApprox { r } => guarded(squeezed_amplitudes(-r, d), d),
        StateKind::DisplacedSqueezed { r, alpha } => {
            let w = working_cutoff(d);
            let psi = displace(squeezed_amplitudes(r, w), cx(alpha[0], alpha[1]))?;
            guarded(psi, d)
        }
        StateKind::CubicPhaseMff { t, r, c } => {
            let w = working_cutoff(d);
            let psi = displace(squeezed_amplitudes(-r, w), real(c))?;
            let cubic = Spectrum::of(&Generator::XCubed.matrix::<T>(w)?)?;
            let m = DMatrix::from_column_slice(w, 1, psi.as_slice());
            let out = cubic.apply_exp_i(t, &m);
            guarded(out.column(0).into_owned(), d)
        }
    }
}

/// P-squeezed vacuum displaced so that `⟨P⟩ = shift`, the reference `|p ≈ shift⟩`.
pub fn displaced_p_eigenstate<T: Real>(r: T, shift: T, cutoff: usize) -> Result<FockVector<T>> {
    if !r.is_finite() || !shift.is_finite() {
        return Err(Error::Domain("non-finite displaced p-eigenstate parameter".into()));
    }
    if shift == T::zero() {
        return make_state(&StateSpec::new(StateKind::PEigenstateApprox { r }, cutoff));
    }
    let w = working_cutoff(cutoff);
    let psi = displace(squeezed_amplitudes(-r, w), cx(T::zero(), shift))?;
    guarded(psi, cutoff)
}

/// Padded cutoff for unitary constructions. Truncation errors of the
/// generator exponentials reach about half-way down from the top level.
fn working_cutoff(cutoff: usize) -> usize {
    2 * cutoff.max(8)
}

/// `e^{−|α|²/2} αⁿ/√n!`, unnormalized after truncation.
fn coherent_amplitudes<T: Real>(alpha: Complex<T>, d: usize) -> DVector<Complex<T>> {
    let mut amps = DVector::from_element(d, real(T::zero()));
    let mut c = real((-alpha.norm_sqr() / T::lit(2.0)).exp());
    for (n, slot) in amps.iter_mut().enumerate() {
        *slot = c;
        c = c * alpha / real(T::count(n + 1).sqrt());
    }
    amps
}

/// `e^{r(a² − a†²)/2}|0⟩`: `c₀ = 1/√cosh r`,
/// `c₂ₖ₊₂ = −tanh r·√((2k+1)/(2k+2))·c₂ₖ`.
fn squeezed_amplitudes<T: Real>(r: T, d: usize) -> DVector<Complex<T>> {
    let mut amps = DVector::from_element(d, real(T::zero()));
    let ratio = -r.tanh();
    let mut c = T::one() / r.cosh().sqrt();
    let mut n = 0;
    while n < d {
        amps[n] = real(c);
        let k = T::count(n);
        c *= ratio * ((k + T::one()) / (k + T::lit(2.0))).sqrt();
        n += 2;
    }
    amps
}

/// `D(α) = e^{2i(Im α·X − Re α·P)}` applied at the vector's own cutoff.
fn displace<T: Real>(psi: DVector<Complex<T>>, alpha: Complex<T>) -> Result<DVector<Complex<T>>> {
    let w = psi.len();
    let (x, p) = fock::quadratures::<T>(w)?;
    let two = T::lit(2.0);
    let generator = (&x.scale(real(two * alpha.im)) - &p.scale(real(two * alpha.re))).hermitian_part();
    let m = DMatrix::from_column_slice(w, 1, psi.as_slice());
    let out = Spectrum::of(&generator)?.apply_exp_i(T::one(), &m);
    Ok(out.column(0).into_owned())
}

/// Truncates raw amplitudes to `cutoff`, normalizes, and applies the default
/// leakage guard (counting discarded probability as leakage).
fn guarded<T: Real>(amps: DVector<Complex<T>>, cutoff: usize) -> Result<FockVector<T>> {
    let total = amps.norm_squared();
    let kept = amps.rows(0, cutoff).into_owned();
    let discarded = ((total - kept.norm_squared()) / total).max(T::zero());
    let state = FockVector::new(kept, Dims::Single(cutoff))?;
    let guard = LeakageGuard::<T>::default();
    let top = guard.check(&state, 0)?;
    if discarded > guard.threshold {
        return Err(Error::TruncationUnsafe {
            step: 0,
            mode: 1,
            leakage: (top + discarded).to_f64_lossy(),
        });
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fidelity, quadrature_statistics, quadratures, DensityMatrix};
    use proptest::prelude::*;

    fn state(kind: StateKind<f64>, cutoff: usize) -> FockVector<f64> {
        make_state(&StateSpec::new(kind, cutoff)).unwrap()
    }

    fn fid(a: &FockVector<f64>, b: &FockVector<f64>) -> f64 {
        fidelity(&DensityMatrix::from_pure(a), &DensityMatrix::from_pure(b)).unwrap()
    }

    #[test]
    fn vacuum_and_fock() {
        let v = state(StateKind::Vacuum, 5);
        assert_eq!(v.amplitudes()[0], Complex::new(1.0, 0.0));
        assert_eq!(
            state(StateKind::Fock { n: 4 }, 5).amplitudes()[4],
            Complex::new(1.0, 0.0)
        );
        assert!(matches!(
            make_state(&StateSpec::new(StateKind::<f64>::Fock { n: 5 }, 5)),
            Err(Error::LevelOutOfRange { level: 5, cutoff: 5 })
        ));
    }

    #[test]
    fn ten_db_squeezed_vacuum() {
        let s = state(StateKind::SqueezedVacuum { r: 1.1513 }, 80);
        let (x, _) = quadratures::<f64>(80).unwrap();
        let (mean, var) = quadrature_statistics(&s, &x).unwrap();
        assert!(mean.abs() < 1e-12);
        assert!((var - 0.025).abs() / 0.025 < 0.01, "{var}");
        for (n, a) in s.amplitudes().iter().enumerate() {
            if n % 2 == 1 {
                assert!(a.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn p_eigenstate_has_squeezed_p_variance() {
        let s = state(StateKind::PEigenstateApprox { r: 0.8 }, 64);
        let (x, p) = quadratures::<f64>(64).unwrap();
        let (_, vp) = quadrature_statistics(&s, &p).unwrap();
        let (_, vx) = quadrature_statistics(&s, &x).unwrap();
        assert!((vp - 0.25 * (-1.6f64).exp()).abs() < 1e-8);
        assert!((vx - 0.25 * 1.6f64.exp()).abs() < 1e-6);
    }

    #[test]
    fn coherent_state_statistics() {
        let s = state(StateKind::Coherent { alpha: [2.0, 0.0] }, 48);
        let (x, _) = quadratures::<f64>(48).unwrap();
        let (mean, var) = quadrature_statistics(&s, &x).unwrap();
        assert!((mean - 2.0).abs() < 1e-9);
        assert!((var - 0.25).abs() < 1e-9);
        let one = state(StateKind::Coherent { alpha: [1.0, 0.0] }, 32);
        let vac = state(StateKind::Vacuum, 32);
        assert!((fid(&one, &vac) - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn displacement_of_vacuum_matches_coherent_amplitudes() {
        let alpha = [0.7, -1.1];
        let a = state(StateKind::DisplacedSqueezed { r: 0.0, alpha }, 40);
        let b = state(StateKind::Coherent { alpha }, 40);
        assert!((a.inner(&b).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn mff_without_cubic_is_p_squeezed_vacuum() {
        let r = 1.1513;
        let mff = state(StateKind::CubicPhaseMff { t: 0.0, r, c: 0.0 }, 96);
        let p0 = state(StateKind::PEigenstateApprox { r }, 96);
        assert!((fid(&mff, &p0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mff_is_centred_and_sheared() {
        let d = 96;
        let (x, p) = quadratures::<f64>(d).unwrap();
        let mff = state(
            StateKind::CubicPhaseMff {
                t: 0.05,
                r: 0.5,
                c: 0.0,
            },
            d,
        );
        let (mx, _) = quadrature_statistics(&mff, &x).unwrap();
        assert!(mx.abs() < 1e-6);
        // e^{itX³}: P → P + (3t/2)X², so ⟨P⟩ = (3t/2)⟨X²⟩ with ⟨X²⟩ = e^{2r}/4
        let (mp, _) = quadrature_statistics(&mff, &p).unwrap();
        let expected = 1.5 * 0.05 * (1.0f64).exp() / 4.0;
        assert!((mp - expected).abs() < 1e-6, "{mp} vs {expected}");
        let moved = state(StateKind::CubicPhaseMff { t: 0.0, r: 0.5, c: 0.8 }, d);
        let (mx, _) = quadrature_statistics(&moved, &x).unwrap();
        assert!((mx - 0.8).abs() < 1e-8);
    }

    #[test]
    fn displaced_reference_state() {
        let r = 1.1513;
        let d = 120;
        let base = displaced_p_eigenstate(r, 0.0, d).unwrap();
        let p0 = state(StateKind::PEigenstateApprox { r }, d);
        assert!((fid(&base, &p0) - 1.0).abs() < 1e-9);

        let shift = 0.2;
        let moved = displaced_p_eigenstate(r, shift, d).unwrap();
        let (_, p) = quadratures::<f64>(d).unwrap();
        let (mp, _) = quadrature_statistics(&moved, &p).unwrap();
        assert!((mp - shift).abs() < 1e-9);
        let e2r = (2.0 * r).exp();
        assert!((fid(&moved, &base) - (-shift * shift * e2r).exp()).abs() < 1e-9);

        // e^r·shift = 3.03485 puts the amplitude overlap at 1e-2
        let shift = 3.03485 / r.exp();
        let far = displaced_p_eigenstate(r, shift, d).unwrap();
        let overlap = far.inner(&base).unwrap().norm();
        assert!((overlap - 1e-2).abs() / 1e-2 < 0.05, "{overlap}");
    }

    #[test]
    fn guard_rejects_undersized_cutoffs() {
        let err = make_state(&StateSpec::new(StateKind::SqueezedVacuum { r: 1.1513f64 }, 32)).unwrap_err();
        assert!(err.is_truncation_unsafe());
        assert!(displaced_p_eigenstate(1.1513f64, 2.0, 40)
            .unwrap_err()
            .is_truncation_unsafe());
    }

    #[test]
    fn spec_rejects_non_finite_parameters() {
        let bad = StateSpec::new(StateKind::SqueezedVacuum { r: f64::NAN }, 16);
        assert!(matches!(make_state(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn spec_toml_round_trip() {
        let spec = StateSpec::new(
            StateKind::CubicPhaseMff {
                t: 0.1,
                r: 0.5,
                c: -0.25,
            },
            64,
        );
        let text = toml::to_string(&spec).unwrap();
        assert!(text.contains("kind = \"cubic_phase_mff\""));
        let back: StateSpec<f64> = toml::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let coh: StateSpec<f64> = toml::from_str("kind = \"coherent\"\nalpha = [1.0, 0.5]\ncutoff = 20\n").unwrap();
        assert_eq!(coh.kind, StateKind::Coherent { alpha: [1.0, 0.5] });
    }

    #[test]
    fn single_precision_squeezed_vacuum() {
        let s = make_state(&StateSpec::new(StateKind::SqueezedVacuum { r: 0.5f32 }, 40)).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn amplitude_overlap_tracks_gaussian_law(shift in 0.0f64..0.25, r in 0.3f64..1.0) {
            let d = 80;
            let base = displaced_p_eigenstate(r, 0.0, d).unwrap();
            let moved = displaced_p_eigenstate(r, shift, d).unwrap();
            let analytic = (-0.5 * shift * shift * (2.0 * r).exp()).exp();
            let overlap = moved.inner(&base).unwrap().norm();
            prop_assert!((overlap - analytic).abs() <= 0.01 * analytic);
            prop_assert!((moved.norm() - 1.0).abs() < 1e-9);
        }
    }
}
