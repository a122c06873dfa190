//! The core runs in single precision with the same API.

use cvgate::compiler::{compile_squeezer, SplitStrategy};
use cvgate::fock::{quadrature_statistics, quadratures, unitarity_defect, Dims};
use cvgate::gates::{GateKind, GateSpec};
use cvgate::{FockVector32, GateEngine32};

#[test]
fn single_precision_gates_are_unitary() {
    let engine = GateEngine32::new();
    for kind in GateKind::ALL {
        let dims = if kind.is_two_mode() {
            Dims::Two(8, 8)
        } else {
            Dims::Single(16)
        };
        let u = engine.gate_matrix(&GateSpec::of(kind, 0.3f32), dims).unwrap();
        assert!(unitarity_defect(&u) < 1e-4, "{kind}");
    }
}

#[test]
fn single_precision_squeezer_matches_double() {
    let r = 0.3f32;
    let plan = compile_squeezer(r, SplitStrategy::Balanced).unwrap();
    let engine = GateEngine32::new();
    let out = engine
        .apply(&plan.sequence, &FockVector32::basis(0, 96).unwrap())
        .unwrap();
    let (x, _) = quadratures::<f32>(96).unwrap();
    let (_, var) = quadrature_statistics(&out, &x).unwrap();
    assert!((var - (-2.0 * r).exp() / 4.0).abs() < 1e-4, "{var}");
}
