//! Declarative experiments: squeezing, photon counting, identity checks,
//! Trotter order and resolvability tables.
//!
//! Every experiment that depends on a Fock cutoff is run twice, at the
//! configured cutoffs and at 1.5× those, and reports the change of each
//! headline metric as its convergence certificate.

mod config;
mod result;

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::Complex;
use serde_json::json;

pub use config::{
    preset, Experiment, ExperimentConfig, IdentityCheckConfig, PhotonCountingConfig, ResolvabilityConfig,
    SqueezingConfig, TrotterConfig, MIN_CUTOFF, PRESET_NAMES, SCHEMA_VERSION,
};
pub use result::{write_artifacts, Artifacts, Certificate, Check, ExperimentResult, Table};

use crate::compiler::{
    compile_cross_p2x, compile_cross_p2x_bare, compile_cross_x2x, compile_cross_x2x_bare, compile_number_coupler,
    compile_quad_x, compile_squeezer, db_to_r, min_r, min_theta, r_to_db, resolvability, resolvability_product,
    ShiftRule, SplitStrategy,
};
use crate::error::{Error, Result};
use crate::fock::{
    self, commutator, partial_trace_first_mode, quadrature_statistics, unitarity_defect, Dims, FockVector,
    ModeOperator, QuantumState,
};
use crate::gates::{max_deviation, GateEngine, GateKind, GateSequence, GateSpec};
use crate::states::{displaced_p_eigenstate, make_state, StateKind, StateSpec};

/// Factor applied to every cutoff for the convergence rerun.
pub const CERTIFICATE_SCALE: f64 = 1.5;

fn refine(cutoff: usize) -> usize {
    (cutoff as f64 * CERTIFICATE_SCALE).ceil() as usize
}

/// What a single run at fixed cutoffs produces.
#[derive(Default)]
struct Outcome {
    headline: BTreeMap<String, f64>,
    diagnostics: BTreeMap<String, f64>,
    labels: BTreeMap<String, String>,
    checks: Vec<Check>,
    notes: Vec<String>,
    leakage: Vec<f64>,
    plan: serde_json::Value,
    table: Option<Table>,
    sequence: Option<GateSequence<f64>>,
}

/// Runs the experiment described by `config` and certifies its headline
/// metrics at 1.5× the configured cutoffs.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let start = Instant::now();
    let engine = GateEngine::<f64>::new();
    let (outcome, certificate) = match &config.experiment {
        Experiment::Squeezing(c) => {
            let base = squeezing_at(c, c.cutoff, &engine)?;
            let fine = squeezing_at(c, refine(c.cutoff), &engine)?;
            let cert = Certificate::compare(
                vec![c.cutoff],
                vec![refine(c.cutoff)],
                &base.headline,
                &fine.headline,
                c.tolerance,
            );
            (base, cert)
        }
        Experiment::PhotonCounting(c) => {
            let [d1, d2] = c.cutoffs;
            let base = photon_counting_at(c, d1, d2, &engine)?;
            let fine = photon_counting_at(c, refine(d1), refine(d2), &engine)?;
            let cert = Certificate::compare(
                vec![d1, d2],
                vec![refine(d1), refine(d2)],
                &base.headline,
                &fine.headline,
                c.tolerance,
            );
            (base, cert)
        }
        Experiment::IdentityCheck(c) => {
            let work = [c.single_cutoff * c.padding, c.two_mode_cutoff * c.padding];
            let base = identity_check_at(c, work, &engine)?;
            let fine_work = [refine(work[0]), refine(work[1])];
            let fine = identity_check_at(c, fine_work, &engine)?;
            let cert = Certificate::compare(
                work.to_vec(),
                fine_work.to_vec(),
                &base.headline,
                &fine.headline,
                c.tolerance,
            );
            (base, cert)
        }
        Experiment::TrotterOrder(c) => {
            let [d1, d2] = c.cutoffs;
            let base = trotter_at(c, d1, d2, &engine)?;
            let fine = trotter_at(c, refine(d1), refine(d2), &engine)?;
            let cert = Certificate::compare(
                vec![d1, d2],
                vec![refine(d1), refine(d2)],
                &base.headline,
                &fine.headline,
                c.tolerance,
            );
            (base, cert)
        }
        Experiment::ResolvabilityTable(c) => {
            let base = resolvability_table(c)?;
            let cert = Certificate::analytic(&base.headline);
            (base, cert)
        }
    };
    let max_leakage = outcome.leakage.iter().copied().fold(0.0, f64::max);
    Ok(ExperimentResult {
        schema_version: SCHEMA_VERSION,
        name: config.name.clone(),
        kind: config.experiment.kind().to_string(),
        headline: outcome.headline,
        certificate,
        plan: outcome.plan,
        wall_time_s: start.elapsed().as_secs_f64(),
        leakage: outcome.leakage,
        max_leakage,
        diagnostics: outcome.diagnostics,
        labels: outcome.labels,
        checks: outcome.checks,
        notes: outcome.notes,
        table: outcome.table,
        sequence: outcome.sequence,
    })
}

/// Total-variation distance between two probability vectors.
fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn squeezing_at(cfg: &SqueezingConfig, cutoff: usize, engine: &GateEngine<f64>) -> Result<Outcome> {
    let r = match (cfg.db, cfg.r) {
        (Some(db), _) => db_to_r(db),
        (None, Some(r)) => r,
        (None, None) => unreachable!("validated config"),
    };
    let (sequence, plan) = if r > 0.0 {
        let plan = compile_squeezer(r, cfg.split)?;
        let report = json!({
            "r": plan.r, "t": plan.t, "t1": plan.t1, "t2": plan.t2,
            "phi1": plan.phi1, "phi2": plan.phi2, "split": plan_split(cfg.split),
            "cubic_strength": plan.t2 / 3.0,
        });
        (plan.sequence, report)
    } else {
        (GateSequence::identity(), json!({ "r": 0.0, "note": "identity" }))
    };
    let vacuum = FockVector::basis(0, cutoff)?;
    let applied = engine.apply_traced(&sequence, &vacuum)?;
    let ideal = make_state(&StateSpec::new(StateKind::SqueezedVacuum { r }, cutoff))?;
    let (x, _) = fock::quadratures::<f64>(cutoff)?;
    let (_, var) = quadrature_statistics(&applied.state, &x)?;
    let achieved_db = -10.0 * (var / 0.25).log10();
    let fidelity = applied.state.overlap_probability(&ideal)?;
    let target_db = r_to_db(r);

    let mut out = Outcome {
        plan,
        leakage: applied.leakage,
        ..Outcome::default()
    };
    out.headline.insert("x_variance".into(), var);
    out.headline.insert("achieved_db".into(), achieved_db);
    out.headline.insert("fidelity".into(), fidelity);
    out.diagnostics.insert("target_db".into(), target_db);
    out.diagnostics.insert("gate_count".into(), sequence.len() as f64);
    out.checks
        .push(Check::within("achieved_db", achieved_db, target_db, 0.3));
    out.checks.push(Check::at_least("fidelity", fidelity, 0.99));
    out.sequence = Some(sequence);
    Ok(out)
}

fn plan_split(split: SplitStrategy) -> serde_json::Value {
    serde_json::to_value(split).unwrap_or(serde_json::Value::Null)
}

/// Mean of `P₂` after tracing out mode 1.
fn meter_mean<S: QuantumState<f64>>(state: &S) -> Result<f64> {
    let rho = partial_trace_first_mode(state)?;
    let (_, p) = fock::quadratures::<f64>(rho.dims().total())?;
    Ok(quadrature_statistics(&rho, &p)?.0)
}

fn photon_counting_at(cfg: &PhotonCountingConfig, d1: usize, d2: usize, engine: &GateEngine<f64>) -> Result<Outcome> {
    let r = db_to_r(cfg.ancilla_db);
    let theta_total = cfg.theta_step * cfg.repetitions as f64;
    let (sequence, plan) = if cfg.repetitions == 0 {
        (
            GateSequence::identity(),
            json!({ "repetitions": 0, "note": "identity" }),
        )
    } else {
        let plan = compile_number_coupler(theta_total, cfg.theta_step, cfg.order, cfg.split)?;
        let report = json!({
            "theta_total": plan.theta_total, "theta_step": plan.theta_step,
            "repetitions": plan.repetitions, "splitting_order": plan.splitting_order,
            "blocks": plan.blocks, "split": plan_split(cfg.split),
            "ancilla_r": r, "gate_count": plan.sequence.len(),
        });
        (plan.sequence, report)
    };
    let ancilla = make_state(&StateSpec::new(StateKind::PEigenstateApprox { r }, d2))?;
    let input = |n: usize| -> Result<FockVector<f64>> { FockVector::product(&FockVector::basis(n, d1)?, &ancilla) };
    let n = cfg.photons;
    let psi = input(n)?;
    let applied = engine.apply_traced(&sequence, &psi)?;
    let rho2 = partial_trace_first_mode(&applied.state)?;

    let direct = GateSequence::new(vec![GateSpec::of(GateKind::NumberCoupler, theta_total)], 0.0);
    let direct_out = engine.apply(&direct, &psi)?;
    let rho2_direct = partial_trace_first_mode(&direct_out)?;

    let mut out = Outcome {
        plan,
        leakage: applied.leakage,
        ..Outcome::default()
    };
    let mut table = Table::new(&["candidate", "reference_shift", "fidelity", "fidelity_direct"]);
    let lowest = n.saturating_sub(1);
    for m in lowest..=n + 1 {
        let shift = theta_total / 2.0 * (m as f64 + 0.5);
        let reference = displaced_p_eigenstate(r, shift, d2)?;
        let f = rho2.pure_overlap(&reference)?;
        let f_direct = rho2_direct.pure_overlap(&reference)?;
        out.headline.insert(format!("fidelity_n{m}"), f);
        out.diagnostics.insert(format!("fidelity_direct_n{m}"), f_direct);
        table.push(vec![
            m.to_string(),
            format!("{shift}"),
            format!("{f}"),
            format!("{f_direct}"),
        ]);
    }
    out.table = Some(table);

    // QND: the mode-1 photon distribution should not move
    let before = psi.number_distribution(1)?;
    let qnd_compiled = total_variation(&before, &applied.state.number_distribution(1)?);
    let qnd_direct = total_variation(&before, &direct_out.number_distribution(1)?);
    out.diagnostics.insert("qnd_deviation_compiled".into(), qnd_compiled);
    out.diagnostics.insert("qnd_deviation_direct".into(), qnd_direct);
    out.checks.push(Check::below("qnd_deviation_direct", qnd_direct, 1e-6));

    // meter shift per photon under the direct coupler
    let p0 = meter_mean(&psi)?;
    let mut worst_shift_error: f64 = 0.0;
    for &m in &cfg.shift_law_photons {
        let moved = engine.apply(&direct, &input(m)?)?;
        let shift = meter_mean(&moved)? - p0;
        let expected = theta_total / 2.0 * (m as f64 + 0.5);
        out.diagnostics.insert(format!("direct_shift_n{m}"), shift);
        worst_shift_error = worst_shift_error.max((shift - expected).abs());
    }
    if !cfg.shift_law_photons.is_empty() {
        out.diagnostics
            .insert("direct_shift_max_error".into(), worst_shift_error);
        out.checks
            .push(Check::below("direct_shift_law", worst_shift_error, 1e-4));
    }

    // per-photon meter separation under the compiled plan
    let next = engine.apply(&sequence, &input(n + 1)?)?;
    let separation = meter_mean(&next)? - meter_mean(&applied.state)?;
    out.headline.insert("separation_per_photon".into(), separation);
    out.diagnostics.insert(
        "separation_rule_half_theta".into(),
        ShiftRule::HalfTheta.factor() * theta_total,
    );
    out.diagnostics.insert(
        "separation_rule_three_quarter_theta".into(),
        ShiftRule::ThreeQuarterTheta.factor() * theta_total,
    );
    if theta_total > 0.0 {
        let matched = [ShiftRule::HalfTheta, ShiftRule::ThreeQuarterTheta]
            .into_iter()
            .min_by(|a, b| {
                let da = (a.factor() * theta_total - separation).abs();
                let db = (b.factor() * theta_total - separation).abs();
                da.total_cmp(&db)
            })
            .expect("two rules");
        out.labels.insert("matched_shift_rule".into(), matched.name().into());
        out.notes.push(format!(
            "compiled meter separation per photon {separation:.6} vs θ/2 = {:.6}, 3θ/4 = {:.6}: matches {}",
            theta_total / 2.0,
            0.75 * theta_total,
            matched.name()
        ));
    }
    out.sequence = Some(sequence);
    Ok(out)
}

/// Max deviation of two single-mode sequences on the lowest `low` levels.
fn single_deviation(
    engine: &GateEngine<f64>,
    a: &GateSequence<f64>,
    b: &GateSequence<f64>,
    work: usize,
    low: usize,
) -> Result<f64> {
    let ua = engine.sequence_matrix(a, Dims::Single(work))?;
    let ub = engine.sequence_matrix(b, Dims::Single(work))?;
    ua.max_abs_diff_on(&ub, low)
}

fn two_mode_deviation(
    engine: &GateEngine<f64>,
    a: &GateSequence<f64>,
    b: &GateSequence<f64>,
    work: usize,
    low: usize,
) -> Result<f64> {
    let dims = Dims::Two(work, work);
    Ok(max_deviation(
        &engine.meter_block(a, dims, low)?,
        &engine.meter_block(b, dims, low)?,
    ))
}

fn direct(kind: GateKind, p: f64) -> GateSequence<f64> {
    GateSequence::new(vec![GateSpec::of(kind, p)], 0.0)
}

fn identity_check_at(cfg: &IdentityCheckConfig, work: [usize; 2], engine: &GateEngine<f64>) -> Result<Outcome> {
    let low1 = cfg.single_cutoff / 2;
    let low2 = cfg.two_mode_cutoff / 2;
    let mut out = Outcome {
        plan: json!({
            "single_cutoff": cfg.single_cutoff, "two_mode_cutoff": cfg.two_mode_cutoff,
            "working_cutoffs": work, "compared_levels": [low1, low2],
        }),
        ..Outcome::default()
    };
    let mut table = Table::new(&["identity", "p1", "p2", "max_deviation"]);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut record = |name: &'static str, p1: f64, p2: f64, dev: f64, table: &mut Table| {
        table.push(vec![name.into(), format!("{p1}"), format!("{p2}"), format!("{dev:e}")]);
        let slot = worst.entry(name).or_insert(0.0);
        *slot = slot.max(dev);
    };

    for &[t1, t2] in &cfg.quad_params {
        let compiled = compile_quad_x(t1, t2);
        let target = direct(GateKind::QuadX, t1 * t2);
        let dev = single_deviation(engine, &compiled, &target, work[0], low1)?;
        record("quad_x", t1, t2, dev, &mut table);
        let stated = compiled.clone().with_global_phase(-t1 * t1 * t1 * t2 / 6.0);
        let dev = single_deviation(engine, &stated, &target, work[0], low1)?;
        record("quad_x_sixth_phase", t1, t2, dev, &mut table);
    }
    for &r in &cfg.squeezer_r {
        let plan = compile_squeezer(r, SplitStrategy::Balanced)?;
        let dev = single_deviation(engine, &plan.sequence, &direct(GateKind::Squeeze, r), work[0], low1)?;
        record("squeezer", r, plan.t1, dev, &mut table);
    }
    for &[t1, t2] in &cfg.cross_params {
        let x2x = direct(GateKind::CrossX2x, t1 * t2);
        let p2x = direct(GateKind::CrossP2x, t1 * t2);
        let dev = two_mode_deviation(engine, &compile_cross_x2x(t1, t2), &x2x, work[1], low2)?;
        record("cross_x2x", t1, t2, dev, &mut table);
        let dev = two_mode_deviation(engine, &compile_cross_p2x(t1, t2), &p2x, work[1], low2)?;
        record("cross_p2x", t1, t2, dev, &mut table);
        let dev = two_mode_deviation(engine, &compile_cross_x2x_bare(t1, t2), &x2x, work[1], low2)?;
        record("cross_x2x_bare", t1, t2, dev, &mut table);
        let dev = two_mode_deviation(engine, &compile_cross_p2x_bare(t1, t2), &p2x, work[1], low2)?;
        record("cross_p2x_bare", t1, t2, dev, &mut table);
    }

    for (name, dev) in worst {
        let key = format!("{name}_max_deviation");
        if matches!(name, "quad_x" | "squeezer" | "cross_x2x" | "cross_p2x") {
            out.checks.push(Check::below(name, dev, cfg.tolerance));
            out.headline.insert(key, dev);
        } else {
            out.diagnostics.insert(key, dev);
        }
    }
    out.notes
        .push("quad_x carries global phase −t1³t2/12; quad_x_sixth_phase is the same sequence with −t1³t2/6".into());
    out.notes.push(
        "cross_*_bare omit the mode-2 cubic_x(−t1³t2/12) correction; their deviation is the uncancelled X₂³ term"
            .into(),
    );
    out.table = Some(table);
    Ok(out)
}

/// Trace-norm distance `2√(1 − |⟨a|b⟩|²)` between pure states.
pub fn trace_distance_pure(a: &FockVector<f64>, b: &FockVector<f64>) -> Result<f64> {
    Ok(2.0 * (1.0 - a.overlap_probability(b)?).max(0.0).sqrt())
}

/// Error of one compiled coupler repetition against the direct gate on `psi`.
pub fn coupler_step_error(
    engine: &GateEngine<f64>,
    theta: f64,
    order: u32,
    split: SplitStrategy,
    psi: &FockVector<f64>,
) -> Result<f64> {
    let plan = compile_number_coupler(theta, theta, order, split)?;
    let compiled = engine.apply(&plan.sequence, psi)?;
    let exact = engine.apply(&direct(GateKind::NumberCoupler, theta), psi)?;
    trace_distance_pure(&compiled, &exact)
}

fn trotter_at(cfg: &TrotterConfig, d1: usize, d2: usize, engine: &GateEngine<f64>) -> Result<Outcome> {
    let psi = FockVector::product(&FockVector::basis(cfg.test_photons, d1)?, &FockVector::basis(0, d2)?)?;
    let mut out = Outcome {
        plan: json!({
            "theta": cfg.theta, "orders": cfg.orders, "split": plan_split(cfg.split),
            "test_state": format!("|{}⟩|0⟩", cfg.test_photons),
        }),
        ..Outcome::default()
    };
    let mut table = Table::new(&["order", "theta", "error"]);
    for &order in &cfg.orders {
        let full = coupler_step_error(engine, cfg.theta, order, cfg.split, &psi)?;
        let half = coupler_step_error(engine, cfg.theta / 2.0, order, cfg.split, &psi)?;
        let ratio = full / half;
        table.push(vec![order.to_string(), format!("{}", cfg.theta), format!("{full:e}")]);
        table.push(vec![
            order.to_string(),
            format!("{}", cfg.theta / 2.0),
            format!("{half:e}"),
        ]);
        out.headline.insert(format!("order{order}_ratio"), ratio);
        out.diagnostics.insert(format!("order{order}_error"), full);
        out.diagnostics.insert(format!("order{order}_error_half"), half);
        let (expected, band) = if order == 1 { (4.0, 0.15) } else { (8.0, 0.20) };
        out.checks
            .push(Check::relative(format!("order{order}_ratio"), ratio, expected, band));
    }
    out.table = Some(table);
    Ok(out)
}

fn resolvability_table(cfg: &ResolvabilityConfig) -> Result<Outcome> {
    let mut table = Table::new(&["theta", "db", "r", "rule", "d", "overlap", "satisfied", "repetitions"]);
    for &theta in &cfg.thetas {
        for &db in &cfg.dbs {
            for rule in [ShiftRule::HalfTheta, ShiftRule::ThreeQuarterTheta] {
                let r = db_to_r(db);
                let res = resolvability(theta, r, rule)?;
                let reps = (theta / cfg.theta_step - 1e-9).ceil().max(0.0) as usize;
                table.push(vec![
                    format!("{theta}"),
                    format!("{db}"),
                    format!("{r}"),
                    rule.name().into(),
                    format!("{}", res.d),
                    format!("{:e}", res.overlap),
                    res.satisfied.to_string(),
                    reps.to_string(),
                ]);
            }
        }
    }
    let mut out = Outcome {
        plan: json!({
            "threshold_overlap": crate::compiler::RESOLVABLE_OVERLAP,
            "threshold_product": resolvability_product(),
            "probe_r": cfg.probe_r, "probe_theta": cfg.probe_theta,
        }),
        table: Some(table),
        ..Outcome::default()
    };
    for rule in [ShiftRule::HalfTheta, ShiftRule::ThreeQuarterTheta] {
        out.headline
            .insert(format!("min_theta_{}", rule.name()), min_theta(cfg.probe_r, rule));
        out.headline.insert(
            format!("min_db_{}", rule.name()),
            r_to_db(min_r(cfg.probe_theta, rule)?),
        );
    }
    out.headline.insert("threshold_product".into(), resolvability_product());
    Ok(out)
}

/// Core numerical properties at a small cutoff: unitarity of every gate,
/// the canonical commutator below the truncation edge, normalization of
/// constructed states, QND number preservation, and trace preservation of
/// the partial trace.
///
/// Two-mode unitarity is checked on dense matrices with half the cutoff per
/// mode (at least [`MIN_CUTOFF`]); the dense `U†U` costs `O(cutoff⁶)`.
pub fn core_property_checks(cutoff: usize) -> Result<Vec<Check>> {
    if cutoff < MIN_CUTOFF {
        return Err(Error::Config(format!("core checks need cutoff ≥ {MIN_CUTOFF}")));
    }
    let engine = GateEngine::<f64>::new();
    let mut checks = Vec::new();
    let half = (cutoff / 2).max(MIN_CUTOFF);
    let two = Dims::Two(half, half);
    for kind in GateKind::ALL {
        let dims = if kind.is_two_mode() { two } else { Dims::Single(cutoff) };
        let u = engine.gate_matrix(&GateSpec::of(kind, 0.37), dims)?;
        checks.push(Check::below(format!("unitarity_{kind}"), unitarity_defect(&u), 1e-9));
    }

    let (x, p) = fock::quadratures::<f64>(cutoff)?;
    let expected = ModeOperator::identity(cutoff).scale(Complex::new(0.0, 0.5));
    let comm = commutator(&x, &p).max_abs_diff_on(&expected, cutoff - 1)?;
    checks.push(Check::below("commutator_xp", comm, 1e-12));

    let specs = [
        StateKind::Vacuum,
        StateKind::Fock { n: 3 },
        StateKind::Coherent { alpha: [0.8, -0.3] },
        StateKind::SqueezedVacuum { r: 0.3 },
        StateKind::PEigenstateApprox { r: 0.3 },
        StateKind::DisplacedSqueezed {
            r: 0.2,
            alpha: [0.4, 0.2],
        },
        StateKind::CubicPhaseMff {
            t: 0.02,
            r: 0.2,
            c: 0.0,
        },
    ];
    let mut worst_norm: f64 = 0.0;
    for kind in specs {
        let s: FockVector<f64> = make_state(&StateSpec::new(kind, cutoff))?;
        worst_norm = worst_norm.max((s.norm() - 1.0).abs());
    }
    checks.push(Check::below("state_normalization", worst_norm, 1e-9));

    let (d1, d2) = (cutoff, cutoff);
    let meter = make_state(&StateSpec::new(StateKind::PEigenstateApprox { r: 0.3 }, d2))?;
    let superposed = FockVector::new(
        nalgebra::DVector::from_fn(d1, |i, _| Complex::new(if i < 3 { 1.0 } else { 0.0 }, 0.0)),
        Dims::Single(d1),
    )?;
    let psi = FockVector::product(&superposed, &meter)?;
    let coupled = engine.apply_gate(&GateSpec::of(GateKind::NumberCoupler, 0.3), &psi)?;
    let qnd = total_variation(&psi.number_distribution(1)?, &coupled.number_distribution(1)?);
    checks.push(Check::below("qnd_number_preservation", qnd, 1e-9));

    let rho = partial_trace_first_mode(&coupled)?;
    checks.push(Check::below("partial_trace_trace", (rho.trace() - 1.0).abs(), 1e-9));
    let sequence = compile_number_coupler(0.2, 0.1, 1, SplitStrategy::Balanced)?.sequence;
    let out = engine.apply(&sequence, &psi)?;
    checks.push(Check::below(
        "sequence_norm_preservation",
        (out.norm() - 1.0).abs(),
        1e-9,
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_preset(name: &str, edit: impl FnOnce(&mut Experiment)) -> ExperimentResult {
        let mut cfg = preset(name).unwrap();
        edit(&mut cfg.experiment);
        run(&cfg).unwrap()
    }

    #[test]
    fn zero_squeezing_is_vacuum() {
        let res = run_preset("squeezing_10db", |e| {
            let Experiment::Squeezing(c) = e else { panic!() };
            c.db = Some(0.0);
            c.cutoff = 16;
        });
        assert!(res.headline["achieved_db"].abs() < 1e-12);
        assert!((res.headline["fidelity"] - 1.0).abs() < 1e-12);
        assert!(res.certificate.converged);
    }

    #[test]
    fn three_db_squeezing_converges() {
        let res = run_preset("squeezing_10db", |e| {
            let Experiment::Squeezing(c) = e else { panic!() };
            c.db = Some(3.0);
            c.cutoff = 64;
        });
        assert_eq!(res.certificate.refined_cutoffs, vec![96]);
        assert!(res.certificate.deltas.values().all(|d| *d < 1e-3));
        assert!(res.all_checks_passed(), "{:?}", res.checks);
    }

    #[test]
    fn zero_interaction_photon_counting() {
        let res = run_preset("photon_counting_two_photon", |e| {
            let Experiment::PhotonCounting(c) = e else { panic!() };
            c.repetitions = 0;
            c.cutoffs = [8, 120];
            c.shift_law_photons.clear();
        });
        assert!((res.headline["fidelity_n2"] - 1.0).abs() < 1e-9);
        assert!(res.sequence.as_ref().unwrap().is_empty());
    }

    #[test]
    fn resolvability_preset() {
        let res = run(&preset("resolvability_sweep").unwrap()).unwrap();
        assert!((res.headline["min_theta_three_quarter_theta"] - 1.28).abs() / 1.28 < 0.01);
        assert_eq!(res.headline["min_db_three_quarter_theta"].round(), 32.0);
        let table = res.table.unwrap();
        let row = table
            .rows
            .iter()
            .find(|r| r[0] == "0.1" && r[1] == "10" && r[3] == "half_theta")
            .unwrap();
        assert_eq!(row[6], "false");
        assert_eq!(row[7], "1");
    }

    #[test]
    fn core_checks_pass_at_small_cutoff() {
        let checks = core_property_checks(16).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert!(core_property_checks(4).is_err());
    }

    #[test]
    fn artifacts_are_written() {
        let res = run_preset("squeezing_10db", |e| {
            let Experiment::Squeezing(c) = e else { panic!() };
            c.db = Some(1.0);
            c.cutoff = 32;
        });
        let dir = tempfile::tempdir().unwrap();
        let arts = write_artifacts(&res, dir.path()).unwrap();
        let back: ExperimentResult = serde_json::from_str(&std::fs::read_to_string(&arts.result).unwrap()).unwrap();
        assert_eq!(back.headline, res.headline);
        let seq: GateSequence<f64> = std::fs::read_to_string(arts.sequence.unwrap())
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(&seq, res.sequence.as_ref().unwrap());
        let leftovers: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
            .collect();
        assert!(leftovers.is_empty());
    }
}
