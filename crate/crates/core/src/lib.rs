//! Truncated Fock-space simulation of cubic-phase-gate decompositions.
//!
//! The numerical core ([`fock`], [`states`], [`gates`], [`compiler`]) is
//! generic over the real scalar type; [`experiments`] works in `f64`.
//! Quadratures follow `X = (a† + a)/2`, `P = i(a† − a)/2`, so `[X, P] = i/2`
//! and the vacuum variance is `1/4`.

// `!(x > 0)` is how domain checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compiler;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod gates;
pub mod scalar;
pub mod states;

pub use error::{Error, Result};
pub use scalar::Real;

pub type FockVector = fock::FockVector<f64>;
pub type DensityMatrix = fock::DensityMatrix<f64>;
pub type ModeOperator = fock::ModeOperator<f64>;
pub type GateSpec = gates::GateSpec<f64>;
pub type GateSequence = gates::GateSequence<f64>;
pub type GateEngine = gates::GateEngine<f64>;
pub type StateSpec = states::StateSpec<f64>;
pub type SqueezerPlan = compiler::SqueezerPlan<f64>;
pub type CouplerPlan = compiler::CouplerPlan<f64>;

pub type FockVector32 = fock::FockVector<f32>;
pub type DensityMatrix32 = fock::DensityMatrix<f32>;
pub type ModeOperator32 = fock::ModeOperator<f32>;
pub type GateSequence32 = gates::GateSequence<f32>;
pub type GateEngine32 = gates::GateEngine<f32>;
