//! Lifecycle objects: ordering rules, error surfacing and pole mapping.

use stlmon::api::{DenseSpecification, DiscreteSpecification, LifecycleError};
use stlmon::time::{Decimal, Duration};

const RG: &str = "out = always(req >= 3 implies eventually[0:5] gnt >= 3)";
const REQ: [f64; 10] = [0.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];

fn discrete() -> DiscreteSpecification {
    DiscreteSpecification::new(Duration::seconds(Decimal::ONE))
}

fn request_grant(mode: &str, req: &[f64]) -> Vec<f64> {
    let mut s = discrete();
    s.declare_var("req", "input").unwrap();
    s.declare_var("gnt", "output").unwrap();
    s.set_semantics(mode).unwrap();
    s.parse(RG).unwrap();
    (0..req.len()).map(|t| s.update(t as u64, &[("req", req[t]), ("gnt", 0.0)]).unwrap()).collect()
}

#[test]
fn predicate_value() {
    let mut s = discrete();
    s.parse("out = a >= 3").unwrap();
    assert_eq!(s.update(0, &[("a", 5.0)]).unwrap(), 2.0);
}

#[test]
fn request_grant_values() {
    assert_eq!(*request_grant("standard", &REQ).last().unwrap(), -2.0);
    assert_eq!(*request_grant("output-robustness", &REQ).last().unwrap(), -3.0);
    let quiet = [2.0; 10];
    assert_eq!(*request_grant("output-robustness", &quiet).last().unwrap(), f64::INFINITY);
    let nu = *request_grant("input-vacuity", &quiet).last().unwrap();
    assert!(nu.is_finite() && nu > 0.0, "{nu}");
}

#[test]
fn poles_become_infinities() {
    let mut s = discrete();
    s.declare_var("i", "input").unwrap();
    s.declare_var("o", "output").unwrap();
    s.set_semantics("output-robustness").unwrap();
    s.parse("p = i >= 0\nq = once[1:2] o >= 0").unwrap();
    let all = s.update_all(0, &[("i", 1.0), ("o", 1.0)]).unwrap();
    assert_eq!(all["p"], f64::INFINITY);
    assert_eq!(all["q"], f64::NEG_INFINITY);
}

#[test]
fn lifecycle_order() {
    let mut s = discrete();
    assert_eq!(s.update(0, &[]), Err(LifecycleError::NotParsed("update")));
    s.declare_var("req", "input").unwrap();
    assert_eq!(s.declare_var("req", "output"), Err(LifecycleError::DuplicateVariable("req".into())));
    assert_eq!(s.set_semantics("fast"), Err(LifecycleError::UnknownSemantics("fast".into())));
    s.set_semantics("input-vacuity").unwrap();
    assert!(matches!(s.declare_var("x", "inout"), Err(LifecycleError::UnknownIoType(_))));
    s.parse("out = req >= 1").unwrap();
    assert_eq!(s.declare_var("gnt", "output"), Err(LifecycleError::AlreadyParsed("declare_var")));
    assert_eq!(s.set_semantics("standard"), Err(LifecycleError::AlreadyParsed("set_semantics")));
    assert_eq!(s.parse("out = req >= 2"), Err(LifecycleError::AlreadyParsed("parse")));
}

#[test]
fn parse_and_update_errors_surface() {
    let mut s = discrete();
    match s.parse("out = a >= ") {
        Err(LifecycleError::Spec(e)) => match *e {
            stlmon::SpecError::Parse(e) => assert_eq!((e.line, e.column), (1, 12)),
            other => panic!("{other:?}"),
        },
        other => panic!("{other:?}"),
    }
    s.declare_var("a", "input").unwrap();
    assert!(matches!(s.parse("out = b >= 0"), Err(LifecycleError::Spec(_))));
    s.parse("out = a >= 0").unwrap();
    assert!(matches!(s.update(1, &[("a", 0.0)]), Err(LifecycleError::Monitor(_))));
    assert!(matches!(s.update(0, &[]), Err(LifecycleError::Monitor(_))));
    assert!(s.update(0, &[("a", 0.0)]).is_ok());
}

#[test]
fn instances_do_not_share_state() {
    let (mut p, mut q) = (discrete(), discrete());
    p.parse("out = once[0:3] a >= 0").unwrap();
    q.parse("out = once[0:3] a >= 0").unwrap();
    p.update(0, &[("a", 7.0)]).unwrap();
    assert_eq!(q.update(0, &[("a", 1.0)]).unwrap(), 1.0);
    assert_eq!(p.update(1, &[("a", 1.0)]).unwrap(), 7.0);
}

#[test]
fn dense_segments() {
    let mut s = DenseSpecification::new();
    s.declare_var("a", "input").unwrap();
    s.set_semantics("standard").unwrap();
    s.parse("out = once[0:1] a >= 0").unwrap();
    let segs = s.update(&[("a", vec![(0.0, 2.0), (1.5, -1.0), (4.0, 0.5)])]).unwrap();
    assert_eq!(segs, vec![(0.0, 2.0), (2.5, -1.0), (4.0, 0.5)]);
    assert_eq!(s.declare_var("b", "input"), Err(LifecycleError::AlreadyParsed("declare_var")));
    assert!(matches!(s.update(&[("a", vec![(3.0, 1.0)])]), Err(LifecycleError::Monitor(_))));
}

#[test]
fn dense_rejects_step_operators() {
    let mut s = DenseSpecification::new();
    assert!(matches!(s.parse("out = prev a >= 0"), Err(LifecycleError::Monitor(_))));
}
