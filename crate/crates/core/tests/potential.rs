use complex_sturm::potential::pathological::complex_rational;
use complex_sturm::potential::{parse_potential, pathological_potential, probe_endpoint, EndpointClass, Endpoint, Interval, Potential, PotentialRepr};
use complex_sturm::{Complex64 as C, Error};
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;

fn pot(src: &str, a: f64, b: f64) -> Potential {
    parse_potential(src, Interval::new(a, b).unwrap()).unwrap()
}

#[test]
fn parse_examples() {
    let zero = pot("0", 0.0, 1.0);
    assert_eq!(zero.eval(0.3), C::new(0.0, 0.0));
    let inv = pot("1/x^2", 0.0, INF);
    assert_eq!(inv.eval(0.5), C::new(4.0, 0.0));
    let sims = pot("x^6 - 1.5i*x^2", 1.0, INF);
    assert_eq!(sims.eval(2.0), C::new(64.0, -6.0));
    let spaced = pot(" ( 2 + 3i ) * sin( x )\t", -1.0, 1.0);
    assert!((spaced.eval(0.4) - C::new(2.0, 3.0) * 0.4f64.sin()).norm() < 1e-15);
}

#[test]
fn parse_errors() {
    let iv = Interval::new(0.0, 1.0).unwrap();
    assert!(matches!(parse_potential("x +", iv), Err(Error::Syntax { pos: 3, .. })));
    assert!(matches!(parse_potential("2*y", iv), Err(Error::UnknownIdentifier { pos: 2, .. })));
    assert!(matches!(parse_potential("x^1.5", iv), Err(Error::NonIntegerExponent { .. })));
}

#[test]
fn interval_invariants() {
    assert!(Interval::new(1.0, 0.0).is_err());
    assert!(Interval::new(0.0, 0.0).is_err());
    assert!(Interval::new(INF, INF).is_err());
    assert!(Interval::new(f64::NAN, 1.0).is_err());
    let line = Interval::new(-INF, INF).unwrap();
    assert!(line.contains_open(1e300) && !line.contains_open(INF));
}

#[test]
fn probe_examples() {
    let class = |src: &str, e| probe_endpoint(&pot(src, 0.0, 1.0), e).unwrap().class;
    assert_eq!(class("0", Endpoint::A), EndpointClass::Regular);
    assert_eq!(class("1/x^2", Endpoint::A), EndpointClass::Neither);
    assert_eq!(class("1/x", Endpoint::A), EndpointClass::SemiregularOnly);
    assert_eq!(probe_endpoint(&pot("0", 0.0, INF), Endpoint::B).unwrap().class, EndpointClass::Neither);
    let p = pot("1/x", 0.0, 1.0).probed().unwrap();
    assert!(!p.meta(Endpoint::A).regular && p.meta(Endpoint::A).semiregular);
    assert!(p.meta(Endpoint::B).regular);
}

#[test]
fn probe_is_monotone() {
    for src in ["0", "1/x", "1/sqrt(x)", "log(x)", "1/x^2", "exp(x)/x"] {
        let p = pot(src, 0.0, 1.0);
        let r = probe_endpoint(&p, Endpoint::A).unwrap();
        if r.class == EndpointClass::Regular {
            assert!(p.is_semiregular(Endpoint::A).unwrap(), "{src}");
        }
    }
}

#[test]
fn probe_reports_partial_sums_when_quadrature_gives_up() {
    // |sin(1/x)| has a kink at every zero, so the shell integrals exhaust the
    // panel budget well before the partial sums settle.
    match probe_endpoint(&pot("sin(1/x)", 0.0, 1.0), Endpoint::A) {
        Err(Error::ProbeIndeterminate { partial }) => {
            assert!(partial.len() >= 3);
            assert!(partial.windows(2).all(|w| w[1] >= w[0]));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn serialization() {
    let p = pot("x^2 - 1i", 0.0, INF).probed().unwrap();
    let json = serde_json::to_value(p.to_repr()).unwrap();
    assert_eq!(json["interval"]["a"], 0.0);
    assert_eq!(json["interval"]["b_finite"], false);
    assert!(json["interval"]["b"].is_null());
    assert_eq!(json["expr"], "x^2 - 1i");
    assert_eq!(json["meta"]["a"]["regular"], true);
    let back: PotentialRepr = serde_json::from_value(json).unwrap();
    let q = Potential::from_repr(&back).unwrap();
    assert_eq!(q.eval(1.7), p.eval(1.7));
    assert_eq!(q.meta(Endpoint::A), p.meta(Endpoint::A));

    // Regular at an infinite endpoint is rejected.
    let mut bad = p.to_repr();
    bad.meta.b.regular = true;
    bad.meta.b.semiregular = true;
    assert!(Potential::from_repr(&bad).is_err());
}

#[test]
fn pathological_examples() {
    assert!(pathological_potential(0).is_err());
    let p = pathological_potential(1).unwrap();
    let c2 = complex_rational(0);
    // I_n = ]n² − n, n² + n[; one prime gives I_2, I_4, I_8, ...
    assert_eq!(p.eval(3.5), c2);
    assert_eq!(p.eval(14.0), c2);
    assert_eq!(p.eval(60.0), c2);
    assert_eq!(p.eval(8.0), C::new(0.0, 0.0));
    assert_eq!(p.eval(1.0), C::new(0.0, 0.0));
    for n in [2.0f64, 4.0, 8.0] {
        assert!(p.breakpoints().contains(&(n * n - n)) && p.breakpoints().contains(&(n * n + n)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pathological_is_constant_between_breaks(count in 1usize..6, k in 0usize..40, t in 0.01f64..0.99) {
        let p = pathological_potential(count).unwrap();
        let b = p.breakpoints();
        prop_assume!(k + 1 < b.len());
        let (lo, hi) = (b[k], b[k + 1]);
        let x = lo + t * (hi - lo);
        prop_assert_eq!(p.eval(x), p.eval(0.5 * (lo + hi)));
    }
}
