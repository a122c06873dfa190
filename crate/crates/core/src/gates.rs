//! Primitive gates, gate sequences and their application to Fock states.
//!
//! Every primitive is `e^{iθG}` for a single-mode Hermitian generator `G`, or
//! `e^{iθ G₁⊗G₂}` for a product of single-mode generators on two modes. Both
//! forms are applied through cached eigendecompositions of the single-mode
//! factors, so a two-mode gate never needs a `d₁d₂ × d₁d₂` eigensolve.
//!
//! Generators are polynomials in the truncated `X` and `P` matrices. All
//! powers of `X` therefore share one eigenbasis, and the truncated `X² + P²`
//! is diagonal, which keeps the number coupler exactly QND.
//!
//! # Ordering
//!
//! A [`GateSequence`] lists gates in operator-product order, as they appear
//! when an identity is written out: the **last** gate in the list acts on the
//! state **first**.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use nalgebra::{Complex, ComplexField, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, Dims, FockVector, ModeOperator, Spectrum};
use crate::scalar::{cis, cx, wrap_phase, Real};

/// Single-mode Hermitian generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    X,
    P,
    XSquared,
    PSquared,
    XCubed,
    PCubed,
    /// `a†a`
    Number,
    /// `X² + P²`
    QuadratureSum,
    /// `−i(a² − a†²)/2`, so that `e^{irG} = e^{r(a² − a†²)/2}`.
    Squeeze,
}

impl Generator {
    /// Power of `X` this generator equals, if any. Such generators are
    /// diagonal in the eigenbasis of the truncated `X`.
    fn x_power(self) -> Option<i32> {
        match self {
            Generator::X => Some(1),
            Generator::XSquared => Some(2),
            Generator::XCubed => Some(3),
            _ => None,
        }
    }

    pub fn matrix<T: Real>(self, cutoff: usize) -> Result<ModeOperator<T>> {
        let (x, p) = fock::quadratures::<T>(cutoff)?;
        let op = match self {
            Generator::X => x,
            Generator::P => p,
            Generator::XSquared => (&x * &x).hermitian_part(),
            Generator::PSquared => (&p * &p).hermitian_part(),
            Generator::XCubed => (&(&x * &x) * &x).hermitian_part(),
            Generator::PCubed => (&(&p * &p) * &p).hermitian_part(),
            Generator::Number => fock::number(cutoff)?,
            Generator::QuadratureSum => (&(&x * &x) + &(&p * &p)).hermitian_part(),
            Generator::Squeeze => {
                let (a, ad) = fock::ladder::<T>(cutoff)?;
                let diff = &(&a * &a) - &(&ad * &ad);
                diff.scale(cx(T::zero(), T::lit(-0.5))).hermitian_part()
            }
        };
        Ok(op)
    }
}

/// How a gate kind is generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Action {
    Local(Generator),
    /// First generator on the first target mode, second on the second.
    Product(Generator, Generator),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    /// `e^{itX}`
    ShiftX,
    /// `e^{itP}`
    ShiftP,
    /// `e^{iφa†a}`
    Phase,
    /// `e^{r(a² − a†²)/2}`
    Squeeze,
    /// `e^{itX³}`
    CubicX,
    /// `e^{itP³}`
    CubicP,
    /// `e^{itX²}`
    QuadX,
    /// `e^{itP₁X₂}`
    CrossPx,
    /// `e^{itX₁X₂}`
    CrossXx,
    /// `e^{itX₁²X₂}`
    CrossX2x,
    /// `e^{itP₁²X₂}`
    CrossP2x,
    /// `e^{iθ(X₁² + P₁²)X₂}`
    NumberCoupler,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
        GateKind::ShiftX,
        GateKind::ShiftP,
        GateKind::Phase,
        GateKind::Squeeze,
        GateKind::CubicX,
        GateKind::CubicP,
        GateKind::QuadX,
        GateKind::CrossPx,
        GateKind::CrossXx,
        GateKind::CrossX2x,
        GateKind::CrossP2x,
        GateKind::NumberCoupler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::ShiftX => "shift_x",
            GateKind::ShiftP => "shift_p",
            GateKind::Phase => "phase",
            GateKind::Squeeze => "squeeze",
            GateKind::CubicX => "cubic_x",
            GateKind::CubicP => "cubic_p",
            GateKind::QuadX => "quad_x",
            GateKind::CrossPx => "cross_px",
            GateKind::CrossXx => "cross_xx",
            GateKind::CrossX2x => "cross_x2x",
            GateKind::CrossP2x => "cross_p2x",
            GateKind::NumberCoupler => "number_coupler",
        }
    }

    pub fn is_two_mode(self) -> bool {
        matches!(self.action(), Action::Product(..))
    }

    fn action(self) -> Action {
        use Generator as G;
        match self {
            GateKind::ShiftX => Action::Local(G::X),
            GateKind::ShiftP => Action::Local(G::P),
            GateKind::Phase => Action::Local(G::Number),
            GateKind::Squeeze => Action::Local(G::Squeeze),
            GateKind::CubicX => Action::Local(G::XCubed),
            GateKind::CubicP => Action::Local(G::PCubed),
            GateKind::QuadX => Action::Local(G::XSquared),
            GateKind::CrossPx => Action::Product(G::P, G::X),
            GateKind::CrossXx => Action::Product(G::X, G::X),
            GateKind::CrossX2x => Action::Product(G::XSquared, G::X),
            GateKind::CrossP2x => Action::Product(G::PSquared, G::X),
            GateKind::NumberCoupler => Action::Product(G::QuadratureSum, G::X),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidGate(format!("unknown gate kind `{s}`")))
    }
}

/// Mode(s) a gate acts on, labelled 1 and 2. For two-mode kinds the first
/// label receives the first factor of the generator (the `P₁` in `P₁X₂`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    One(usize),
    Two(usize, usize),
}

impl Target {
    fn modes(self) -> Vec<usize> {
        match self {
            Target::One(m) => vec![m],
            Target::Two(a, b) => vec![a, b],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSpec<T> {
    pub kind: GateKind,
    pub parameter: T,
    pub target: Target,
}

impl<T: Real> GateSpec<T> {
    pub fn new(kind: GateKind, parameter: T, target: Target) -> Result<Self> {
        if !parameter.is_finite() {
            return Err(Error::InvalidGate(format!("{kind}: non-finite parameter")));
        }
        match (kind.is_two_mode(), target) {
            (false, Target::One(m)) if m == 1 || m == 2 => {}
            (true, Target::Two(a, b)) if a != b && [a, b].iter().all(|&m| m == 1 || m == 2) => {}
            _ => return Err(Error::InvalidGate(format!("{kind}: invalid target {target:?}"))),
        }
        Ok(Self {
            kind,
            parameter,
            target,
        })
    }

    /// Single-mode gate on mode 1, or two-mode gate on modes (1, 2).
    pub fn of(kind: GateKind, parameter: T) -> Self {
        let target = if kind.is_two_mode() {
            Target::Two(1, 2)
        } else {
            Target::One(1)
        };
        Self {
            kind,
            parameter,
            target,
        }
    }

    /// Single-mode gate on the given mode.
    pub fn on(kind: GateKind, parameter: T, mode: usize) -> Result<Self> {
        Self::new(kind, parameter, Target::One(mode))
    }

    pub fn inverse(&self) -> Self {
        Self {
            parameter: -self.parameter,
            ..*self
        }
    }

    fn validate_for(&self, dims: Dims) -> Result<()> {
        for m in self.target.modes() {
            dims.cutoff(m).map_err(|_| {
                Error::InvalidGate(format!(
                    "{} targets mode {m} of a {}-mode state",
                    self.kind,
                    dims.mode_count()
                ))
            })?;
        }
        Ok(())
    }

    /// (generator on mode 1, generator on mode 2) for two-mode gates.
    fn product_factors(&self) -> Option<(Generator, Generator)> {
        match (self.kind.action(), self.target) {
            (Action::Product(g, h), Target::Two(1, _)) => Some((g, h)),
            (Action::Product(g, h), Target::Two(..)) => Some((h, g)),
            _ => None,
        }
    }
}

/// Ordered gate product with a global phase `e^{i·global_phase}`.
///
/// `gates[0]` is the leftmost operator and acts last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSequence<T> {
    gates: Vec<GateSpec<T>>,
    global_phase: T,
}

impl<T: Real> GateSequence<T> {
    /// `gates` in operator-product order.
    pub fn new(gates: Vec<GateSpec<T>>, global_phase: T) -> Self {
        Self {
            gates,
            global_phase: wrap_phase(global_phase),
        }
    }

    pub fn identity() -> Self {
        Self::new(Vec::new(), T::zero())
    }

    pub fn gates(&self) -> &[GateSpec<T>] {
        &self.gates
    }

    pub fn global_phase(&self) -> T {
        self.global_phase
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Gates in the order they act on a state.
    pub fn execution_order(&self) -> impl Iterator<Item = &GateSpec<T>> {
        self.gates.iter().rev()
    }

    /// Sequence that applies `self` first and `next` afterwards (`next · self`).
    pub fn then(&self, next: &GateSequence<T>) -> Self {
        let mut gates = next.gates.clone();
        gates.extend(self.gates.iter().copied());
        Self::new(gates, self.global_phase + next.global_phase)
    }

    pub fn repeated(&self, times: usize) -> Self {
        (0..times).fold(Self::identity(), |acc, _| acc.then(self))
    }

    pub fn with_global_phase(mut self, phase: T) -> Self {
        self.global_phase = wrap_phase(phase);
        self
    }

    pub fn count_of(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }
}

const TEXT_HEADER: &str = "# cvgate gate sequence v1\n\
# operator-product order: the last gate line acts on the state first\n\
# columns: kind parameter mode [mode]\n";

impl<T: Real> fmt::Display for GateSequence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(TEXT_HEADER)?;
        for g in &self.gates {
            match g.target {
                Target::One(m) => writeln!(f, "{} {} {}", g.kind, g.parameter, m)?,
                Target::Two(a, b) => writeln!(f, "{} {} {} {}", g.kind, g.parameter, a, b)?,
            }
        }
        writeln!(f, "global_phase {}", self.global_phase)
    }
}

impl<T: Real> FromStr for GateSequence<T> {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut gates = Vec::new();
        let mut phase = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: line_no, message };
            if phase.is_some() {
                return Err(err("content after global_phase".into()));
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let number = |s: &str| -> Result<T> {
                s.parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| err(format!("bad number `{s}`: {e}")))
            };
            let mode =
                |s: &str| -> Result<usize> { s.parse::<usize>().map_err(|e| err(format!("bad mode `{s}`: {e}"))) };
            if fields[0] == "global_phase" {
                if fields.len() != 2 {
                    return Err(err("expected `global_phase <radians>`".into()));
                }
                phase = Some(number(fields[1])?);
                continue;
            }
            let kind: GateKind = fields[0].parse().map_err(|e: Error| err(e.to_string()))?;
            let target = match fields.len() {
                3 => Target::One(mode(fields[2])?),
                4 => Target::Two(mode(fields[2])?, mode(fields[3])?),
                _ => return Err(err(format!("expected 3 or 4 fields, found {}", fields.len()))),
            };
            let parameter = number(fields[1])?;
            gates.push(GateSpec::new(kind, parameter, target).map_err(|e| err(e.to_string()))?);
        }
        let phase = phase.ok_or(Error::Parse {
            line: text.lines().count(),
            message: "missing trailing global_phase line".into(),
        })?;
        Ok(GateSequence::new(gates, phase))
    }
}

/// Rejects states whose probability creeps into the top Fock levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeakageGuard<T> {
    /// Fraction of the levels (per mode) counted as "top".
    pub fraction: T,
    /// Maximum probability tolerated there.
    pub threshold: T,
}

impl<T: Real> Default for LeakageGuard<T> {
    fn default() -> Self {
        Self {
            fraction: T::lit(0.1),
            threshold: T::lit(1e-6),
        }
    }
}

impl<T: Real> LeakageGuard<T> {
    pub fn disabled() -> Self {
        Self {
            fraction: T::lit(0.1),
            threshold: T::max_value().unwrap_or(T::one()),
        }
    }

    /// Largest top-level weight over the modes; errors past the threshold.
    pub fn check(&self, state: &FockVector<T>, step: usize) -> Result<T> {
        let weights = state.top_weight(self.fraction);
        let (mode, worst) = weights
            .iter()
            .copied()
            .enumerate()
            .fold((0, T::zero()), |best, (i, w)| if w > best.1 { (i, w) } else { best });
        if worst > self.threshold {
            return Err(Error::TruncationUnsafe {
                step,
                mode: mode + 1,
                leakage: worst.to_f64_lossy(),
            });
        }
        Ok(worst)
    }
}

/// Output of a guarded sequence application.
#[derive(Clone, Debug)]
pub struct Applied<T: Real> {
    pub state: FockVector<T>,
    /// Top-level weight (max over modes) after each gate, in execution order.
    pub leakage: Vec<T>,
}

impl<T: Real> Applied<T> {
    pub fn max_leakage(&self) -> T {
        self.leakage.iter().copied().fold(T::zero(), |a, b| a.max(b))
    }
}

type SpectrumCache<T> = RwLock<HashMap<(Generator, usize), Arc<Spectrum<T>>>>;

/// Applies gates, caching the eigendecomposition of each (generator, cutoff).
///
/// The cache is read-mostly and never changes observable results; an engine
/// can be shared across threads.
pub struct GateEngine<T: Real> {
    spectra: SpectrumCache<T>,
    guard: LeakageGuard<T>,
}

impl<T: Real> Default for GateEngine<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> GateEngine<T> {
    pub fn new() -> Self {
        Self::with_guard(LeakageGuard::default())
    }

    pub fn with_guard(guard: LeakageGuard<T>) -> Self {
        Self {
            spectra: RwLock::new(HashMap::new()),
            guard,
        }
    }

    pub fn guard(&self) -> LeakageGuard<T> {
        self.guard
    }

    pub fn spectrum(&self, generator: Generator, cutoff: usize) -> Result<Arc<Spectrum<T>>> {
        let key = (generator, cutoff);
        if let Some(s) = self.spectra.read().expect("spectrum cache poisoned").get(&key) {
            return Ok(Arc::clone(s));
        }
        let computed = Arc::new(Spectrum::of(&generator.matrix(cutoff)?)?);
        let mut cache = self.spectra.write().expect("spectrum cache poisoned");
        Ok(Arc::clone(cache.entry(key).or_insert(computed)))
    }

    /// Dense unitary of one gate on the full space described by `dims`.
    pub fn gate_matrix(&self, spec: &GateSpec<T>, dims: Dims) -> Result<ModeOperator<T>> {
        spec.validate_for(dims)?;
        if let Some((g1, g2)) = spec.product_factors() {
            let Dims::Two(d1, d2) = dims else {
                unreachable!("validated two-mode target")
            };
            let s1 = self.spectrum(g1, d1)?;
            let s2 = self.spectrum(g2, d2)?;
            let basis = s1.vectors().kronecker(s2.vectors());
            let mut scaled = basis.clone();
            for (k, mut col) in scaled.column_iter_mut().enumerate() {
                let ev = s1.values()[k / d2] * s2.values()[k % d2];
                col *= cis(spec.parameter * ev);
            }
            return ModeOperator::general(scaled * basis.adjoint());
        }
        let Target::One(mode) = spec.target else {
            unreachable!("single-mode kinds carry a single target")
        };
        let Action::Local(g) = spec.kind.action() else {
            unreachable!()
        };
        let local = self.spectrum(g, dims.cutoff(mode)?)?.exp_i(spec.parameter);
        local.on_mode(mode, dims)
    }

    /// Dense unitary of a whole sequence, global phase included.
    pub fn sequence_matrix(&self, seq: &GateSequence<T>, dims: Dims) -> Result<ModeOperator<T>> {
        let n = dims.total();
        let mut acc = DMatrix::<Complex<T>>::identity(n, n);
        for gate in seq.execution_order() {
            acc = self.gate_matrix(gate, dims)?.entries() * acc;
        }
        ModeOperator::general(acc * cis(seq.global_phase()))
    }

    /// One gate, without the leakage guard.
    pub fn apply_gate(&self, spec: &GateSpec<T>, state: &FockVector<T>) -> Result<FockVector<T>> {
        let dims = state.dims();
        spec.validate_for(dims)?;
        let psi = state.as_mode_matrix();
        let out = if let Some((g1, g2)) = spec.product_factors() {
            let Dims::Two(d1, d2) = dims else {
                unreachable!("validated two-mode target")
            };
            let s1 = self.spectrum(g1, d1)?;
            let s2 = self.spectrum(g2, d2)?;
            // Φ = V₁† Ψ V₂*, scaled by e^{iθλᵢμⱼ}, then Ψ' = V₁ Φ V₂ᵀ.
            let mut phi = s1.vectors().adjoint() * &psi * s2.vectors().conjugate();
            for j in 0..d2 {
                for i in 0..d1 {
                    phi[(i, j)] *= cis(spec.parameter * s1.values()[i] * s2.values()[j]);
                }
            }
            s1.vectors() * phi * s2.vectors().transpose()
        } else {
            let Target::One(mode) = spec.target else { unreachable!() };
            let Action::Local(g) = spec.kind.action() else {
                unreachable!()
            };
            let s = self.spectrum(g, dims.cutoff(mode)?)?;
            if mode == 1 {
                s.apply_exp_i(spec.parameter, &psi)
            } else {
                // Ψ Uᵀ = (U Ψᵀ)ᵀ
                s.apply_exp_i(spec.parameter, &psi.transpose()).transpose()
            }
        };
        Ok(FockVector::from_mode_matrix(&out, dims))
    }

    /// Applies every gate in execution order, checking the leakage guard after
    /// each one, then multiplies by the global phase.
    pub fn apply_traced(&self, seq: &GateSequence<T>, state: &FockVector<T>) -> Result<Applied<T>> {
        let mut current = state.clone();
        let mut leakage = Vec::with_capacity(seq.len());
        for (step, gate) in seq.execution_order().enumerate() {
            current = self.apply_gate(gate, &current)?;
            leakage.push(self.guard.check(&current, step)?);
        }
        let phased = current.amplitudes() * cis(seq.global_phase());
        Ok(Applied {
            state: FockVector::from_parts(phased, current.dims()),
            leakage,
        })
    }

    pub fn apply(&self, seq: &GateSequence<T>, state: &FockVector<T>) -> Result<FockVector<T>> {
        Ok(self.apply_traced(seq, state)?.state)
    }

    /// Matrix of `seq` restricted to the two-mode basis states `|i⟩₁|j⟩₂` with
    /// `i, j < low`, ordered `i·low + j` for rows and columns.
    ///
    /// Every gate must commute with `X₂`: single-mode gates on mode 1, powers
    /// of `X` on mode 2, and product gates whose mode-2 factor is `X`. In the
    /// eigenbasis of the truncated `X₂` the sequence is then block diagonal,
    /// one `d₁ × d₁` block per eigenvalue, which is far cheaper than the dense
    /// product at large cutoffs.
    pub fn meter_block(&self, seq: &GateSequence<T>, dims: Dims, low: usize) -> Result<DMatrix<Complex<T>>> {
        let Dims::Two(d1, d2) = dims else {
            return Err(Error::InvalidDimension("meter block needs two modes".into()));
        };
        if low == 0 || low > d1.min(d2) {
            return Err(Error::InvalidDimension(format!(
                "block size {low} exceeds cutoffs {d1}x{d2}"
            )));
        }
        enum Step<T: Real> {
            Mode1(Arc<Spectrum<T>>, T),
            MeterPhase(i32, T),
            Coupled(Arc<Spectrum<T>>, i32, T),
        }
        let mut steps = Vec::with_capacity(seq.len());
        for gate in seq.execution_order() {
            gate.validate_for(dims)?;
            let step = match (gate.kind.action(), gate.target, gate.product_factors()) {
                (_, Target::Two(..), Some((g1, g2))) => match g2.x_power() {
                    Some(k) => Step::Coupled(self.spectrum(g1, d1)?, k, gate.parameter),
                    None => return Err(non_meter(gate)),
                },
                (Action::Local(g), Target::One(1), _) => Step::Mode1(self.spectrum(g, d1)?, gate.parameter),
                (Action::Local(g), Target::One(_), _) => match g.x_power() {
                    Some(k) => Step::MeterPhase(k, gate.parameter),
                    None => return Err(non_meter(gate)),
                },
                _ => return Err(non_meter(gate)),
            };
            steps.push(step);
        }

        let meter = self.spectrum(Generator::X, d2)?;
        let w = meter.vectors();
        let zero = Complex::new(T::zero(), T::zero());
        let mut block = DMatrix::from_element(low * low, low * low, zero);
        let start = DMatrix::<Complex<T>>::identity(d1, low);
        for (k, &x) in meter.values().iter().enumerate() {
            let mut m = start.clone();
            for step in &steps {
                match step {
                    Step::Mode1(s, theta) => m = s.apply_exp_i(*theta, &m),
                    Step::MeterPhase(p, theta) => m *= cis(*theta * x.powi(*p)),
                    Step::Coupled(s, p, theta) => m = s.apply_exp_i(*theta * x.powi(*p), &m),
                }
            }
            // ⟨i'j'|U|ij⟩ = Σₖ W[j',k]·Mₖ[i',i]·W[j,k]*
            for jp in 0..low {
                for j in 0..low {
                    let weight = w[(jp, k)] * w[(j, k)].conjugate();
                    if weight.modulus() == T::zero() {
                        continue;
                    }
                    for ip in 0..low {
                        for i in 0..low {
                            block[(ip * low + jp, i * low + j)] += m[(ip, i)] * weight;
                        }
                    }
                }
            }
        }
        Ok(block * cis(seq.global_phase()))
    }
}

fn non_meter<T: Real>(gate: &GateSpec<T>) -> Error {
    Error::InvalidGate(format!(
        "{} on {:?} does not commute with the mode-2 X quadrature",
        gate.kind, gate.target
    ))
}

/// Dense unitary of one gate (fresh engine, no caching across calls).
pub fn gate_matrix<T: Real>(spec: &GateSpec<T>, dims: Dims) -> Result<ModeOperator<T>> {
    GateEngine::new().gate_matrix(spec, dims)
}

/// Guarded application of a sequence (fresh engine).
pub fn apply<T: Real>(seq: &GateSequence<T>, state: &FockVector<T>) -> Result<FockVector<T>> {
    GateEngine::new().apply(seq, state)
}

/// Max entrywise deviation between two equally sized matrices.
pub fn max_deviation<T: Real>(a: &DMatrix<Complex<T>>, b: &DMatrix<Complex<T>>) -> T {
    (a - b).iter().fold(T::zero(), |m, z| m.max(z.modulus()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{quadrature_statistics, quadratures, unitarity_defect};
    use nalgebra::DVector;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn random_state(dims: Dims, seed: u64) -> FockVector<f64> {
        // small LCG, enough to get a generic superposition
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let amps = DVector::from_fn(dims.total(), |_, _| Complex::new(next(), next()));
        FockVector::new(amps, dims).unwrap()
    }

    #[test]
    fn full_turn_phase_is_identity() {
        let u = gate_matrix(&GateSpec::of(GateKind::Phase, 2.0 * PI), Dims::Single(12)).unwrap();
        assert!(u.max_abs_diff_on(&ModeOperator::identity(12), 12).unwrap() < 1e-9);
    }

    #[test]
    fn squeeze_gate_reduces_x_variance() {
        let d = 48;
        let vac = FockVector::basis(0, d).unwrap();
        let seq = GateSequence::new(vec![GateSpec::of(GateKind::Squeeze, 0.5)], 0.0);
        let out = apply(&seq, &vac).unwrap();
        let (x, _) = quadratures::<f64>(d).unwrap();
        let (_, var) = quadrature_statistics(&out, &x).unwrap();
        let expected = 0.25 * (-1.0f64).exp();
        assert!(((var - expected) / expected).abs() < 0.01, "{var}");
    }

    #[test]
    fn cubic_and_shift_in_x_commute() {
        let dims = Dims::Single(24);
        let u = gate_matrix(&GateSpec::of(GateKind::CubicX, 0.3), dims).unwrap();
        let v = gate_matrix(&GateSpec::of(GateKind::ShiftX, 0.7), dims).unwrap();
        let comm = fock::commutator(&u, &v);
        assert!(comm.max_abs() < 1e-9);
    }

    #[test]
    fn every_kind_is_unitary_with_inverse_adjoint() {
        for kind in GateKind::ALL {
            let dims = if kind.is_two_mode() {
                Dims::Two(6, 7)
            } else {
                Dims::Single(14)
            };
            let g = GateSpec::of(kind, 0.37);
            let u = gate_matrix(&g, dims).unwrap();
            assert!(unitarity_defect(&u) < 1e-9, "{kind}");
            let inv = gate_matrix(&g.inverse(), dims).unwrap();
            let n = dims.total();
            assert!(inv.max_abs_diff_on(&u.adjoint(), n).unwrap() < 1e-9, "{kind}");
        }
    }

    #[test]
    fn quad_x_mode_transformation() {
        // U a U† = (1 − it/2)a − (it/2)a† on the low levels; truncation errors
        // reach about half-way down from the top
        let d = 48;
        let t = 0.3;
        let u = gate_matrix(&GateSpec::of(GateKind::QuadX, t), Dims::Single(d)).unwrap();
        let (a, ad) = fock::ladder::<f64>(d).unwrap();
        let lhs = &(&u * &a) * &u.adjoint();
        let rhs = &a.scale(Complex::new(1.0, -t / 2.0)) + &ad.scale(Complex::new(0.0, -t / 2.0));
        assert!(lhs.max_abs_diff_on(&rhs, d / 2).unwrap() < 1e-7);
    }

    #[test]
    fn empty_and_inverse_pair_sequences_leave_state_alone() {
        let dims = Dims::Single(20);
        let psi = FockVector::basis(2, 20).unwrap();
        let out = apply(&GateSequence::identity(), &psi).unwrap();
        assert_eq!(out, psi);
        let seq = GateSequence::new(
            vec![
                GateSpec::of(GateKind::ShiftP, 0.4),
                GateSpec::of(GateKind::ShiftP, -0.4),
            ],
            0.0,
        );
        let out = apply(&seq, &psi).unwrap();
        assert!((out.inner(&psi).unwrap() - Complex::new(1.0, 0.0)).modulus() < 1e-9);
        assert_eq!(out.dims(), dims);
    }

    #[test]
    fn factored_application_matches_dense_matrices() {
        let engine = GateEngine::<f64>::with_guard(LeakageGuard::disabled());
        let dims = Dims::Two(5, 6);
        let psi = random_state(dims, 7);
        let mut gates: Vec<GateSpec<f64>> = GateKind::ALL.iter().map(|&k| GateSpec::of(k, 0.21)).collect();
        gates.push(GateSpec::new(GateKind::CrossPx, -0.4, Target::Two(2, 1)).unwrap());
        gates.push(GateSpec::on(GateKind::CubicP, 0.2, 2).unwrap());
        for g in &gates {
            let dense = engine.gate_matrix(g, dims).unwrap();
            let via_dense = dense.entries() * psi.amplitudes();
            let via_factors = engine.apply_gate(g, &psi).unwrap();
            let err = (via_dense - via_factors.amplitudes())
                .iter()
                .fold(0.0f64, |m, z| m.max(z.modulus()));
            assert!(err < 1e-12, "{} {:?}: {err}", g.kind, g.target);
        }
    }

    #[test]
    fn meter_block_matches_dense_product() {
        let engine = GateEngine::<f64>::new();
        let dims = Dims::Two(7, 8);
        let seq = GateSequence::new(
            vec![
                GateSpec::of(GateKind::CrossPx, 0.3),
                GateSpec::of(GateKind::CubicX, 0.1),
                GateSpec::on(GateKind::CubicX, -0.05, 2).unwrap(),
                GateSpec::of(GateKind::NumberCoupler, 0.2),
                GateSpec::of(GateKind::CrossP2x, -0.2),
            ],
            0.3,
        );
        let low = 4;
        let block = engine.meter_block(&seq, dims, low).unwrap();
        let dense = engine.sequence_matrix(&seq, dims).unwrap();
        let (_, d2) = (7, 8);
        for ip in 0..low {
            for jp in 0..low {
                for i in 0..low {
                    for j in 0..low {
                        let a = block[(ip * low + jp, i * low + j)];
                        let b = dense.entries()[(ip * d2 + jp, i * d2 + j)];
                        assert!((a - b).modulus() < 1e-12);
                    }
                }
            }
        }
        let bad = GateSequence::new(vec![GateSpec::on(GateKind::ShiftP, 0.1, 2).unwrap()], 0.0);
        assert!(matches!(
            engine.meter_block(&bad, dims, low),
            Err(Error::InvalidGate(_))
        ));
    }

    #[test]
    fn guard_flags_leakage() {
        let psi = FockVector::<f64>::basis(0, 10).unwrap();
        let seq = GateSequence::new(vec![GateSpec::of(GateKind::ShiftP, 6.0)], 0.0);
        match apply(&seq, &psi) {
            Err(Error::TruncationUnsafe {
                step: 0,
                mode: 1,
                leakage,
            }) => assert!(leakage > 1e-6),
            other => panic!("expected truncation-unsafe, got {other:?}"),
        }
    }

    #[test]
    fn invalid_targets_are_rejected() {
        assert!(GateSpec::new(GateKind::CrossPx, 0.1, Target::One(1)).is_err());
        assert!(GateSpec::new(GateKind::CubicX, 0.1, Target::Two(1, 2)).is_err());
        assert!(GateSpec::new(GateKind::CrossPx, 0.1, Target::Two(1, 1)).is_err());
        assert!(GateSpec::new(GateKind::CubicX, 0.1, Target::One(3)).is_err());
        assert!(GateSpec::new(GateKind::CubicX, f64::NAN, Target::One(1)).is_err());
        let psi = FockVector::<f64>::basis(0, 4).unwrap();
        let seq = GateSequence::new(vec![GateSpec::of(GateKind::CrossPx, 0.1)], 0.0);
        assert!(matches!(apply(&seq, &psi), Err(Error::InvalidGate(_))));
    }

    #[test]
    fn global_phase_is_wrapped_and_applied() {
        let seq = GateSequence::<f64>::new(vec![], 3.0 * PI / 2.0);
        assert!((seq.global_phase() + PI / 2.0).abs() < 1e-12);
        let psi = FockVector::basis(0, 4).unwrap();
        let out = apply(&seq, &psi).unwrap();
        assert!((out.amplitudes()[0] - Complex::new(0.0, -1.0)).modulus() < 1e-12);
    }

    #[test]
    fn then_composes_in_execution_order() {
        let a = GateSequence::new(vec![GateSpec::of(GateKind::ShiftP, 1.0)], 0.1);
        let b = GateSequence::new(vec![GateSpec::of(GateKind::CubicX, 2.0)], 0.2);
        let ab = a.then(&b);
        assert_eq!(ab.gates()[0].kind, GateKind::CubicX);
        assert_eq!(ab.execution_order().next().unwrap().kind, GateKind::ShiftP);
        assert!((ab.global_phase() - 0.3).abs() < 1e-15);
        assert_eq!(a.repeated(3).len(), 3);
    }

    #[test]
    fn text_format_parse_errors() {
        assert!(matches!(
            "cubic_x 0.1 1\n".parse::<GateSequence<f64>>(),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            "warp 0.1 1\nglobal_phase 0\n".parse::<GateSequence<f64>>(),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            "global_phase 0\ncubic_x 0.1 1\n".parse::<GateSequence<f64>>(),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            "cross_px 0.1 1\nglobal_phase 0\n".parse::<GateSequence<f64>>(),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    fn arb_gate() -> impl Strategy<Value = GateSpec<f64>> {
        (0..GateKind::ALL.len(), -10.0f64..10.0, any::<bool>()).prop_map(|(k, p, swap)| {
            let kind = GateKind::ALL[k];
            let target = match (kind.is_two_mode(), swap) {
                (true, false) => Target::Two(1, 2),
                (true, true) => Target::Two(2, 1),
                (false, s) => Target::One(if s { 2 } else { 1 }),
            };
            GateSpec::new(kind, p, target).unwrap()
        })
    }

    proptest! {
        #[test]
        fn text_round_trip(gates in prop::collection::vec(arb_gate(), 0..12), phase in -3.0f64..3.0) {
            let seq = GateSequence::new(gates, phase);
            let parsed: GateSequence<f64> = seq.to_string().parse().unwrap();
            prop_assert_eq!(parsed, seq);
        }

        #[test]
        fn inverse_gate_undoes_gate(k in 0..GateKind::ALL.len(), p in -1.0f64..1.0) {
            let kind = GateKind::ALL[k];
            let dims = if kind.is_two_mode() { Dims::Two(5, 5) } else { Dims::Single(10) };
            let g = GateSpec::of(kind, p);
            let engine = GateEngine::<f64>::new();
            let u = engine.gate_matrix(&g, dims).unwrap();
            let v = engine.gate_matrix(&g.inverse(), dims).unwrap();
            let prod = &u * &v;
            prop_assert!(prod.max_abs_diff_on(&ModeOperator::identity(dims.total()), dims.total()).unwrap() < 1e-9);
        }
    }
}
