//! Lowering of quadratic, squeezing and number-coupling unitaries to sequences
//! of cubic phase gates and Gaussian gates, plus the scalar relations between
//! their parameters.
//!
//! All sequences are in operator-product order (see [`GateSequence`]).

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{GateKind, GateSequence, GateSpec, Target};
use crate::scalar::{cx, Real};

/// Amplitude-overlap threshold that counts two meter states as resolved.
pub const RESOLVABLE_OVERLAP: f64 = 1e-2;

/// `e^r·d` at which the amplitude overlap `e^{−d²e^{2r}/2}` equals
/// [`RESOLVABLE_OVERLAP`], i.e. `√(2 ln 100)`.
pub fn resolvability_product() -> f64 {
    (-2.0 * RESOLVABLE_OVERLAP.ln()).sqrt()
}

pub fn db_to_r<T: Real>(db: T) -> T {
    db * T::ln_10() / T::lit(20.0)
}

pub fn r_to_db<T: Real>(r: T) -> T {
    r * T::lit(20.0) / T::ln_10()
}

/// Quadratic-gate strength `t` equivalent to squeezing `r`:
/// `t = 2 tanh r/√(1 − tanh²r) = 2 sinh r`.
pub fn t_from_r<T: Real>(r: T) -> Result<T> {
    if !(r >= T::zero()) {
        return Err(Error::Domain(format!("squeezing r must be non-negative, got {r}")));
    }
    Ok(T::lit(2.0) * r.sinh())
}

pub fn r_from_t<T: Real>(t: T) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("gate strength t must be non-negative, got {t}")));
    }
    Ok((t / T::lit(2.0)).asinh())
}

/// Phase-rotation angles `(φ₁, φ₂) = (−½atan(t/2) − π/4, −½atan(t/2) + π/4)`.
pub fn bloch_messiah_phases<T: Real>(t: T) -> (T, T) {
    let base = -(t / T::lit(2.0)).atan() / T::lit(2.0);
    (base - T::frac_pi_4(), base + T::frac_pi_4())
}

fn gate<T: Real>(kind: GateKind, parameter: T) -> GateSpec<T> {
    GateSpec::of(kind, parameter)
}

fn on_mode<T: Real>(kind: GateKind, parameter: T, mode: usize) -> GateSpec<T> {
    GateSpec {
        kind,
        parameter,
        target: Target::One(mode),
    }
}

/// Five-gate template `[s(t1), c(t2/3), s(−2t1), c(−t2/3), s(t1)]`.
fn conjugation_template<T: Real>(shift: GateSpec<T>, cubic: GateSpec<T>, t1: T, t2: T) -> Vec<GateSpec<T>> {
    let third = t2 / T::lit(3.0);
    let s = |p: T| GateSpec { parameter: p, ..shift };
    let c = |p: T| GateSpec { parameter: p, ..cubic };
    vec![s(t1), c(third), s(-T::lit(2.0) * t1), c(-third), s(t1)]
}

/// `e^{it1t2X²}` as shift_p / cubic_x conjugations. The product of the five
/// gates is `e^{it1t2X²}·e^{it1³t2/12}`, so the sequence carries global phase
/// `−t1³t2/12`.
pub fn compile_quad_x<T: Real>(t1: T, t2: T) -> GateSequence<T> {
    let gates = conjugation_template(gate(GateKind::ShiftP, t1), gate(GateKind::CubicX, t2), t1, t2);
    GateSequence::new(gates, -quad_phase(t1, t2))
}

fn quad_phase<T: Real>(t1: T, t2: T) -> T {
    t1 * t1 * t1 * t2 / T::lit(12.0)
}

/// `e^{it1t2X₁²X₂}` as cross_px / cubic_x conjugations followed by the
/// mode-2 correction `cubic_x(−t1³t2/12)`.
pub fn compile_cross_x2x<T: Real>(t1: T, t2: T) -> GateSequence<T> {
    with_meter_correction(compile_cross_x2x_bare(t1, t2), t1, t2)
}

/// `e^{it1t2P₁²X₂}` as cross_xx / cubic_p conjugations followed by the
/// mode-2 correction `cubic_x(−t1³t2/12)`.
pub fn compile_cross_p2x<T: Real>(t1: T, t2: T) -> GateSequence<T> {
    with_meter_correction(compile_cross_p2x_bare(t1, t2), t1, t2)
}

/// The five-gate x2x template alone. It equals
/// `e^{it1t2X₁²X₂}·e^{it1³t2X₂³/12}`.
pub fn compile_cross_x2x_bare<T: Real>(t1: T, t2: T) -> GateSequence<T> {
    let gates = conjugation_template(gate(GateKind::CrossPx, t1), on_mode(GateKind::CubicX, t2, 1), t1, t2);
    GateSequence::new(gates, T::zero())
}

/// The five-gate p2x template `[xx(−t1), p³(t2/3), xx(2t1), p³(−t2/3), xx(−t1)]`.
/// It equals `e^{it1t2P₁²X₂}·e^{it1³t2X₂³/12}`.
pub fn compile_cross_p2x_bare<T: Real>(t1: T, t2: T) -> GateSequence<T> {
    let gates = conjugation_template(gate(GateKind::CrossXx, -t1), on_mode(GateKind::CubicP, t2, 1), -t1, t2);
    GateSequence::new(gates, T::zero())
}

fn with_meter_correction<T: Real>(bare: GateSequence<T>, t1: T, t2: T) -> GateSequence<T> {
    let mut gates = bare.gates().to_vec();
    gates.push(on_mode(GateKind::CubicX, -quad_phase(t1, t2), 2));
    GateSequence::new(gates, bare.global_phase())
}

/// How a product `t = t1·t2` is split between the shift and cubic strengths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum SplitStrategy {
    /// `t1 = √|t|`, `t2 = t/t1`.
    #[default]
    Balanced,
    /// Fixed cubic strength parameter `t2`.
    FixedCubic { t2: f64 },
    /// Fixed shift `t1`.
    FixedShift { t1: f64 },
}

impl SplitStrategy {
    pub fn split<T: Real>(&self, t: T) -> Result<(T, T)> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("cannot split non-finite t={t}")));
        }
        match *self {
            SplitStrategy::Balanced => {
                if t == T::zero() {
                    return Ok((T::zero(), T::zero()));
                }
                let t1 = t.abs().sqrt();
                Ok((t1, t / t1))
            }
            SplitStrategy::FixedCubic { t2 } => {
                let t2 = nonzero(t2, "t2")?;
                Ok((t / T::lit(t2), T::lit(t2)))
            }
            SplitStrategy::FixedShift { t1 } => {
                let t1 = nonzero(t1, "t1")?;
                Ok((T::lit(t1), t / T::lit(t1)))
            }
        }
    }
}

fn nonzero(v: f64, name: &str) -> Result<f64> {
    if v == 0.0 || !v.is_finite() {
        return Err(Error::Domain(format!("fixed {name} must be finite and non-zero")));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezerPlan<T> {
    pub r: T,
    pub t: T,
    pub t1: T,
    pub t2: T,
    pub phi1: T,
    pub phi2: T,
    pub sequence: GateSequence<T>,
}

/// `e^{r(a² − a†²)/2} = e^{i(φ₁+φ₂)/2}·e^{iφ₂N}·e^{itX²}·e^{iφ₁N}` with the
/// quadratic gate lowered by [`compile_quad_x`].
pub fn compile_squeezer<T: Real>(r: T, split: SplitStrategy) -> Result<SqueezerPlan<T>> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::Domain(format!("squeezer needs r > 0, got {r}")));
    }
    let t = t_from_r(r)?;
    let (t1, t2) = split.split(t)?;
    let (phi1, phi2) = bloch_messiah_phases(t);
    let quad = compile_quad_x(t1, t2);
    let mut gates = vec![gate(GateKind::Phase, phi2)];
    gates.extend_from_slice(quad.gates());
    gates.push(gate(GateKind::Phase, phi1));
    let phase = quad.global_phase() + (phi1 + phi2) / T::lit(2.0);
    Ok(SqueezerPlan {
        r,
        t,
        t1,
        t2,
        phi1,
        phi2,
        sequence: GateSequence::new(gates, phase),
    })
}

/// One decomposed factor inside a coupler repetition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubBlock<T> {
    pub kind: GateKind,
    pub theta: T,
    pub t1: T,
    pub t2: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplerPlan<T> {
    pub theta_total: T,
    pub theta_step: T,
    pub repetitions: usize,
    pub splitting_order: u32,
    /// Sub-blocks of one repetition, in operator-product order.
    pub blocks: Vec<SubBlock<T>>,
    pub sequence: GateSequence<T>,
}

/// `e^{iθ(X₁²+P₁²)X₂}` as `θ_total/θ_step` repetitions of a Trotter step.
///
/// Order 1: `x2x(θ)·p2x(θ)`. Order 2: `p2x(θ/2)·x2x(θ)·p2x(θ/2)`.
pub fn compile_number_coupler<T: Real>(
    theta_total: T,
    theta_step: T,
    order: u32,
    split: SplitStrategy,
) -> Result<CouplerPlan<T>> {
    if !(theta_step > T::zero()) || !theta_total.is_finite() {
        return Err(Error::Domain(format!(
            "coupler needs a positive step and finite total, got {theta_step} / {theta_total}"
        )));
    }
    let ratio = theta_total / theta_step;
    let repetitions = ratio.round();
    if (ratio - repetitions).abs() > T::lit(1e-9) || repetitions < T::one() {
        return Err(Error::Domain(format!(
            "theta_total/theta_step = {ratio} is not a positive integer"
        )));
    }
    let repetitions = repetitions.to_usize().expect("positive integral count");
    let half = theta_step / T::lit(2.0);
    let steps: Vec<(GateKind, T)> = match order {
        1 => vec![(GateKind::CrossX2x, theta_step), (GateKind::CrossP2x, theta_step)],
        2 => vec![
            (GateKind::CrossP2x, half),
            (GateKind::CrossX2x, theta_step),
            (GateKind::CrossP2x, half),
        ],
        other => return Err(Error::Domain(format!("splitting order must be 1 or 2, got {other}"))),
    };
    let mut blocks = Vec::with_capacity(steps.len());
    let mut step_seq = GateSequence::identity();
    // accumulate right to left so the product keeps operator order
    for &(kind, theta) in steps.iter().rev() {
        let (t1, t2) = split.split(theta)?;
        let seq = match kind {
            GateKind::CrossX2x => compile_cross_x2x(t1, t2),
            _ => compile_cross_p2x(t1, t2),
        };
        step_seq = step_seq.then(&seq);
        blocks.push(SubBlock { kind, theta, t1, t2 });
    }
    blocks.reverse();
    Ok(CouplerPlan {
        theta_total,
        theta_step,
        repetitions,
        splitting_order: order,
        blocks,
        sequence: step_seq.repeated(repetitions),
    })
}

/// Meter shift per photon used to judge resolvability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftRule {
    /// `d = θ/2`, the spacing of the `(θ/2)(n + ½)` meter shifts.
    HalfTheta,
    /// `d = 3θ/4`.
    ThreeQuarterTheta,
}

impl ShiftRule {
    pub fn factor(self) -> f64 {
        match self {
            ShiftRule::HalfTheta => 0.5,
            ShiftRule::ThreeQuarterTheta => 0.75,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShiftRule::HalfTheta => "half_theta",
            ShiftRule::ThreeQuarterTheta => "three_quarter_theta",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolvability {
    pub d: f64,
    pub overlap: f64,
    pub satisfied: bool,
}

/// Whether neighbouring photon numbers leave distinguishable meter states:
/// amplitude overlap `e^{−d²e^{2r}/2} ≤ 1e-2`.
pub fn resolvability(theta: f64, r: f64, rule: ShiftRule) -> Result<Resolvability> {
    if !(theta >= 0.0) || !(r >= 0.0) || !theta.is_finite() || !r.is_finite() {
        return Err(Error::Domain(format!(
            "resolvability needs θ ≥ 0, r ≥ 0; got {theta}, {r}"
        )));
    }
    let d = rule.factor() * theta;
    let overlap = (-0.5 * d * d * (2.0 * r).exp()).exp();
    Ok(Resolvability {
        d,
        overlap,
        satisfied: overlap <= RESOLVABLE_OVERLAP,
    })
}

/// Smallest total interaction θ that resolves neighbouring photon numbers at `r`.
pub fn min_theta(r: f64, rule: ShiftRule) -> f64 {
    resolvability_product() * (-r).exp() / rule.factor()
}

/// Smallest squeezing (nepers) that resolves neighbouring photon numbers at `θ`.
pub fn min_r(theta: f64, rule: ShiftRule) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("min_r needs θ > 0, got {theta}")));
    }
    Ok((resolvability_product() / (rule.factor() * theta)).ln().max(0.0))
}

/// Principal root `c = 1/(1 + e^{iπ/(n+1)})` of `c^{n+1} + (1 − c)^{n+1} = 0`,
/// the weight of a two-term Suzuki concatenation raising the order past `n`.
pub fn suzuki_coefficient<T: Real>(n: u32) -> Result<Complex<T>> {
    if n == 0 {
        return Err(Error::Domain("suzuki_coefficient needs n ≥ 1".into()));
    }
    let alpha = T::pi() / T::count(n as usize + 1);
    let half = T::lit(0.5);
    Ok(cx(half, -half * alpha.sin() / (T::one() + alpha.cos())))
}
