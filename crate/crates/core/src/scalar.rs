//! Scalar abstraction shared by every numerical module.

use std::fmt;

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar the simulation is generic over (`f32` or `f64`).
///
/// Transcendental functions come from [`RealField`]; conversions to and from
/// `f64` literals come from num-traits.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + fmt::Display + fmt::LowerExp + Send + Sync {
    /// Converts an `f64` constant into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts an integer count into this scalar type.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion used for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute tolerance for structural checks (Hermiticity, normalization)
    /// that should only see roundoff. Stays at 1e-10 for `f64`, widens for `f32`.
    fn structural_tol() -> Self {
        let eps = Self::default_epsilon() * Self::lit(1e4);
        let floor = Self::lit(1e-10);
        if eps > floor {
            eps
        } else {
            floor
        }
    }
}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + fmt::Display + fmt::LowerExp + Send + Sync {}

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// e^{iθ}
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase<T: Real>(phase: T) -> T {
    let two_pi = T::two_pi();
    let mut p = phase % two_pi;
    if p > T::pi() {
        p -= two_pi;
    } else if p <= -T::pi() {
        p += two_pi;
    }
    p
}
