use complex_sturm::boundary::{BoundaryFunctional, BoundarySpec};
use complex_sturm::greens::apply_kernel;
use complex_sturm::ivp::{solve_ivp, IvpOptions, Source};
use complex_sturm::potential::{parse_potential, Endpoint, Interval, Potential};
use complex_sturm::spectra::fd::{fd_build, fd_cauchy_determinant, fd_oracle_build, fd_richardson};
use complex_sturm::spectra::{
    characteristic_wronskian, characteristic_with_derivative, find_eigenvalues, find_roots, resolvent_kernel, Realization, Region, SearchBudget,
};
use complex_sturm::par::Exec;
use complex_sturm::{Complex64 as C, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PI: f64 = std::f64::consts::PI;
const INF: f64 = f64::INFINITY;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn pot(src: &str, a: f64, b: f64) -> Potential {
    parse_potential(src, Interval::new(a, b).unwrap()).unwrap()
}

fn regular(p: &Potential, a: (C, C), b: (C, C)) -> Realization {
    let spec = BoundarySpec::new(
        Some(BoundaryFunctional::regular(p, Endpoint::A, a.0, a.1).unwrap()),
        Some(BoundaryFunctional::regular(p, Endpoint::B, b.0, b.1).unwrap()),
    )
    .unwrap();
    Realization::new(p.clone(), spec).unwrap()
}

fn dirichlet(src: &str, a: f64, b: f64) -> Realization {
    let d = (c(0.0, 0.0), c(1.0, 0.0));
    regular(&pot(src, a, b), d, d)
}

fn eigen(r: &Realization, reg: (f64, f64, f64, f64)) -> Vec<C> {
    find_eigenvalues(r, Region::new(reg.0, reg.1, reg.2, reg.3).unwrap(), SearchBudget::default()).unwrap().iter().map(|e| e.lambda).collect()
}

#[test]
fn free_dirichlet_spectrum() {
    let r = dirichlet("0", 0.0, PI);
    let ev = find_eigenvalues(&r, Region::new(0.5, 10.0, -1.0, 1.0).unwrap(), SearchBudget::default()).unwrap();
    assert_eq!(ev.len(), 3);
    for (e, want) in ev.iter().zip([1.0, 4.0, 9.0]) {
        assert!((e.lambda - want).norm() < 1e-8, "{}", e.lambda);
        assert!(e.residual < 1e-8);
        assert_eq!(e.multiplicity, 1);
        assert!(e.cutoff_shift.is_none());
    }
    assert!(eigen(&r, (-10.0, -0.5, -1.0, 1.0)).is_empty());
    for n in 1..4 {
        assert!(characteristic_wronskian(&r, c((n * n) as f64, 0.0)).unwrap().norm() < 1e-9);
    }
}

#[test]
fn free_dirichlet_neumann_spectrum() {
    let p = pot("0", 0.0, PI);
    let r = regular(&p, (c(0.0, 0.0), c(1.0, 0.0)), (c(1.0, 0.0), c(0.0, 0.0)));
    let ev = eigen(&r, (0.1, 7.0, -1.0, 1.0));
    assert_eq!(ev.len(), 3);
    for (e, want) in ev.iter().zip([0.25, 2.25, 6.25]) {
        assert!((e - want).norm() < 1e-8, "{e}");
    }
}

#[test]
fn derivative_matches_difference_quotient() {
    let r = dirichlet("(1+2i)*x^2 - 1i", 0.0, 1.0);
    let l = c(3.0, 1.5);
    let (w, dw) = characteristic_with_derivative(&r, l).unwrap();
    assert!((w - characteristic_wronskian(&r, l).unwrap()).norm() < 1e-10 * (1.0 + w.norm()));
    let h = 1e-5;
    let fd = (characteristic_wronskian(&r, l + h).unwrap() - characteristic_wronskian(&r, l - h).unwrap()) / (2.0 * h);
    assert!((fd - dw).norm() < 1e-6 * (1.0 + dw.norm()), "{fd} {dw}");
}

#[test]
fn oracle_agreement() {
    for src in ["0", "x", "1i*x", "x^2 - 1i*x"] {
        let r = dirichlet(src, 0.0, 1.0);
        let mut roots = eigen(&r, (0.0, 100.0, -3.0, 3.0));
        roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
        let fd = fd_richardson(&r, &[200, 400, 800], c(0.0, 0.0), 3).unwrap();
        for (s, f) in roots.iter().take(3).zip(&fd) {
            assert!((s - f).norm() < 1e-4 * s.norm(), "{src}: {s} vs {f}");
        }
    }
}

#[test]
fn residual_invariant() {
    let r = dirichlet("1i*x + 3*x^3", 0.0, 1.0);
    let ev = find_eigenvalues(&r, Region::new(0.0, 60.0, -3.0, 3.0).unwrap(), SearchBudget::default()).unwrap();
    assert!(!ev.is_empty());
    assert!(ev.iter().all(|e| e.residual < 1e-8));
}

#[test]
fn harmonic_oscillator_on_the_line() {
    let r = Realization::new(pot("x^2", -INF, INF), BoundarySpec::default()).unwrap();
    let ev = find_eigenvalues(&r, Region::new(0.5, 6.0, -1.0, 1.0).unwrap(), SearchBudget::default()).unwrap();
    assert_eq!(ev.len(), 3);
    for (e, want) in ev.iter().zip([1.0, 3.0, 5.0]) {
        assert!((e.lambda - want).norm() < 1e-7, "{}", e.lambda);
        assert!(e.cutoff_shift.unwrap() < 1e-7);
    }
    // Half line with Dirichlet at 0 keeps the odd states.
    let p = pot("x^2", 0.0, INF);
    let spec = BoundarySpec::new(Some(BoundaryFunctional::dirichlet(&p, Endpoint::A).unwrap()), None).unwrap();
    let r = Realization::new(p, spec).unwrap();
    let ev = eigen(&r, (0.5, 12.0, -1.0, 1.0));
    assert_eq!(ev.len(), 3);
    for (e, want) in ev.iter().zip([3.0, 7.0, 11.0]) {
        assert!((e - want).norm() < 1e-7, "{e}");
    }
}

#[test]
fn trajectory_representative_matches_regular_vector() {
    let p = pot("x", 0.0, 1.0);
    let z = c(0.0, 0.0);
    let g = solve_ivp(&p, c(5.0, 1.0), 0.0, z, c(1.0, 0.0), None, (0.0, 1.0), &IvpOptions::default()).unwrap();
    let spec = BoundarySpec::new(Some(BoundaryFunctional::trajectory(Endpoint::A, g)), Some(BoundaryFunctional::dirichlet(&p, Endpoint::B).unwrap())).unwrap();
    let r = Realization::new(p, spec).unwrap();
    let a = eigen(&r, (0.0, 50.0, -1.0, 1.0));
    let b = eigen(&dirichlet("x", 0.0, 1.0), (0.0, 50.0, -1.0, 1.0));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() < 1e-7, "{x} {y}");
    }
}

#[test]
fn realization_checks() {
    let p = pot("0", 0.0, INF);
    // Regular endpoint with no condition.
    assert!(matches!(Realization::new(p.clone(), BoundarySpec::default()), Err(Error::Unsupported(_))));
    // ν = 0 endpoint carrying a condition.
    let g = solve_ivp(&p, c(0.0, 1.0), 1.0, c(1.0, 0.0), c(0.0, 0.0), None, (0.5, 20.0), &IvpOptions::default()).unwrap();
    let spec = BoundarySpec::new(Some(BoundaryFunctional::dirichlet(&p, Endpoint::A).unwrap()), Some(BoundaryFunctional::trajectory(Endpoint::B, g))).unwrap();
    assert!(matches!(Realization::new(p.clone(), spec), Err(Error::InvalidArgument(_))));
    // Free particle on the half line: no eigenvalues off the continuous spectrum.
    let spec = BoundarySpec::new(Some(BoundaryFunctional::dirichlet(&p, Endpoint::A).unwrap()), None).unwrap();
    let r = Realization::new(p, spec).unwrap();
    assert!(eigen(&r, (-5.0, -0.5, -2.0, 2.0)).is_empty());
}

#[test]
fn resolvent_kernel_examples() {
    let r = dirichlet("0", 0.0, 1.0);
    let k = resolvent_kernel(&r, c(0.0, 0.0)).unwrap();
    for (x, y) in [(0.2, 0.7), (0.5, 0.9), (0.1, 0.3)] {
        assert!((k.eval(x, y).unwrap() - x * (1.0 - y)).norm() < 1e-10);
        assert!((k.eval(y, x).unwrap() - k.eval(x, y).unwrap()).norm() < 1e-10);
    }
    let one = Source::compact(|_| c(1.0, 0.0), 0.0, 1.0);
    for x in [0.25, 0.5, 0.8] {
        assert!((apply_kernel(&k, &one, x).unwrap() - x * (1.0 - x) / 2.0).norm() < 1e-9);
    }
    assert!(matches!(resolvent_kernel(&dirichlet("0", 0.0, PI), c(4.0, 0.0)), Err(Error::NearEigenvalue { .. })));
}

#[test]
fn resolvent_inverts_l_minus_lambda() {
    let p = pot("(2-1i)*x^2 + 0.5i", 0.0, 1.0);
    let r = regular(&p, (c(1.0, 0.0), c(0.5, -0.2)), (c(0.0, 0.0), c(1.0, 0.0)));
    let l = c(-3.0, 2.0);
    let k = resolvent_kernel(&r, l).unwrap();
    // Transpose symmetry for separated conditions.
    assert!((k.eval(0.3, 0.6).unwrap() - k.eval(0.6, 0.3).unwrap()).norm() < 1e-10);
    let g = Source::compact(|x| c((3.0 * x).sin(), x), 0.0, 1.0);
    let f = |x: f64| apply_kernel(&k, &g, x).unwrap();
    let h = 2e-3;
    for x in [0.2, 0.45, 0.7] {
        let lap = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let lhs = -lap + (p.eval(x) - l) * f(x);
        assert!((lhs - g.eval(x)).norm() < 1e-4, "{x}: {lhs} {}", g.eval(x));
    }
}

#[test]
fn fd_convergence_and_solve() {
    let r = dirichlet("0", 0.0, PI);
    let e1 = (fd_oracle_build(&r, 100).unwrap().eigenvalues_near(c(0.0, 0.0), 1).unwrap()[0] - 1.0).norm();
    let e2 = (fd_oracle_build(&r, 200).unwrap().eigenvalues_near(c(0.0, 0.0), 1).unwrap()[0] - 1.0).norm();
    assert!(e1 < 1e-3 && (e1 / e2 - 4.0).abs() < 0.05, "{e1} {e2}");
    // −f″ + f = 1, f(0) = f(1) = 0.
    let exact = |x: f64| 1.0 - (x - 0.5).cosh() / 0.5f64.cosh();
    let err = |n: usize| {
        let m = fd_oracle_build(&dirichlet("0", 0.0, 1.0), n).unwrap();
        let f = m.solve_shifted(c(-1.0, 0.0), &vec![c(1.0, 0.0); m.dim()]).unwrap();
        m.nodes.iter().zip(&f).map(|(x, v)| (v - exact(*x)).norm()).fold(0.0, f64::max)
    };
    let (a, b) = (err(50), err(100));
    assert!(a < 1e-4 && (a / b - 4.0).abs() < 0.1, "{a} {b}");
}

#[test]
fn fd_robin_is_second_order() {
    // f′(0) = f(0), f(π) = 0: eigenvalues k² with tan(kπ) = k.
    let p = pot("0", 0.0, PI);
    let r = regular(&p, (c(1.0, 0.0), c(1.0, 0.0)), (c(0.0, 0.0), c(1.0, 0.0)));
    let exact = eigen(&r, (0.05, 3.0, -1.0, 1.0));
    assert!(!exact.is_empty());
    let e = |n| (fd_oracle_build(&r, n).unwrap().eigenvalues_near(exact[0], 1).unwrap()[0] - exact[0]).norm();
    let (a, b) = (e(100), e(200));
    assert!((a / b - 4.0).abs() < 0.2, "{a} {b}");
}

#[test]
fn fd_numerical_range_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = pot("x^2 - 3", 0.0, 1.0);
    let m = fd_oracle_build(&regular(&p, (c(1.0, 0.0), c(0.7, 0.0)), (c(2.0, 0.0), c(-1.0, 0.0))), 64).unwrap();
    let (d, lo, up) = m.weighted();
    assert!(d.iter().all(|z| z.im == 0.0));
    assert!(lo.iter().zip(&up).all(|(x, y)| (x - y).norm() < 1e-12 * x.norm()));
    assert!(m.numerical_range(200, &mut rng).iter().all(|z| z.im.abs() < 1e-10));

    let q = pot("-1i", 0.0, 1.0);
    let m = fd_oracle_build(&regular(&q, (c(1.0, 0.0), c(0.3, 0.0)), (c(0.0, 0.0), c(1.0, 0.0))), 64).unwrap();
    assert!(m.numerical_range(200, &mut rng).iter().all(|z| (z.im + 1.0).abs() < 1e-10));

    let s = pot("-1i*x^2", 0.0, 1.0);
    let ok = fd_oracle_build(&regular(&s, (c(1.0, 0.0), c(0.0, -1.0)), (c(1.0, 0.0), c(0.0, 1.0))), 200).unwrap();
    assert!(ok.numerical_range(200, &mut rng).iter().all(|z| z.im <= 1e-6));
    let bad = fd_oracle_build(&regular(&s, (c(1.0, 0.0), c(0.0, 1.0)), (c(0.0, 0.0), c(1.0, 0.0))), 200).unwrap();
    assert!(bad.numerical_range(200, &mut rng).iter().any(|z| z.im > 0.0));
}

#[test]
fn fd_rejects_small_grids() {
    assert!(fd_oracle_build(&dirichlet("0", 0.0, 1.0), 4).is_err());
    assert!(fd_build(&pot("0", 0.0, 1.0), (0.0, 1.0), 7, None, None).is_err());
}

#[test]
fn forward_green_has_no_spectrum() {
    // Truncated regular problem: dim Ker L_max = 2. The Cauchy realization at a
    // has a constant characteristic determinant; the Dirichlet one does not.
    let p = pot("1i*x + x^2", 0.0, 1.0);
    let region = Region::new(-50.0, 60.0, -50.0, 50.0).unwrap();
    let n = 200;
    let cauchy = |l: C| fd_cauchy_determinant(&p, (0.0, 1.0), n, l);
    let dcauchy = |l: C| Ok((cauchy(l)?, c(0.0, 0.0)));
    let found = find_roots(&cauchy, &dcauchy, region, SearchBudget::default(), Exec::Auto).unwrap();
    assert!(found.is_empty());
    let m = fd_build(&p, (0.0, 1.0), n, None, None).unwrap();
    let det = |l: C| Ok(m.characteristic(l));
    let ddet = |l: C| {
        let h = 1e-6 * (1.0 + l.norm());
        Ok((m.characteristic(l), (m.characteristic(l + h) - m.characteristic(l - h)) / (2.0 * h)))
    };
    let two_sided = find_roots(&det, &ddet, region, SearchBudget::default(), Exec::Auto).unwrap();
    assert_eq!(two_sided.len(), 2);
}
