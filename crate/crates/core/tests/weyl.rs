use complex_sturm::boundary::TailOptions;
use complex_sturm::ivp::{solve_ivp, IvpOptions};
use complex_sturm::par::Exec;
use complex_sturm::potential::{parse_potential, Interval, Potential};
use complex_sturm::weyl::{trichotomy, trichotomy_many, weighted_norm, weyl_basis, weyl_disk, weyl_gram, TrichotomyCase};
use complex_sturm::{Complex64 as C, Error};
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;
const I: C = C::new(0.0, 1.0);

fn pot(src: &str, a: f64, b: f64) -> Potential {
    parse_potential(src, Interval::new(a, b).unwrap()).unwrap()
}

/// ∫₀^d |cos(kx)|² for k = √i = (1+i)/√2.
fn free_norm(d: f64) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    0.5 * ((2.0 * s * d).sinh() / (2.0 * s) + (2.0 * s * d).sin() / (2.0 * s))
}

#[test]
fn free_radius_matches_closed_form() {
    let p = pot("0", 0.0, INF);
    let mut prev = INF;
    for d in [0.5, 1.0, 2.0, 3.0, 5.0] {
        let disk = weyl_disk(&p, I, d).unwrap();
        let want = 0.5 / free_norm(d);
        assert!((disk.radius - want).abs() < 1e-9 * want, "{d}: {} {want}", disk.radius);
        assert!(disk.radius < prev);
        prev = disk.radius;
    }
}

#[test]
fn disks_nest() {
    for src in ["0", "x - 0.5i*x^2", "(1+1i)*sin(x) - 2i"] {
        let p = pot(src, 0.0, INF);
        let l = C::new(0.3, 0.7);
        let d: Vec<_> = [1.0, 2.0, 3.0].iter().map(|d| weyl_disk(&p, l, *d).unwrap()).collect();
        assert!(d[1].nested_in(&d[0], 0.0) && d[2].nested_in(&d[1], 0.0), "{src}");
        assert!(d[2].radius < d[1].radius && d[1].radius < d[0].radius);
    }
}

#[test]
fn circle_formulas_agree() {
    let p = pot("x - 0.5i*x^2", 0.0, INF);
    for d in [0.7, 1.5, 2.5] {
        let g = weyl_gram(&p, I, d).unwrap();
        let disk = g.disk(I).unwrap();
        let (c, r) = g.quadratic_circle();
        assert!((c - disk.center).norm() < 1e-8 * (1.0 + c.norm()));
        assert!((r - disk.radius).abs() < 1e-8 * (1.0 + r), "{r} {}", disk.radius);
        // |i/2 − ⟨u,v⟩|² − ‖u‖²‖v‖² = 1/4.
        let q = (C::new(0.0, 0.5) - g.uv).norm_sqr() - g.uu * g.vv;
        assert!((q - 0.25).abs() < 1e-8 * g.uu * g.vv.max(1.0), "{q}");
        // Center through the Wronskian at d: W_d(ū,v)/(2i‖u‖²).
        let (u, v) = weyl_basis(&p, I, d, &IvpOptions::default()).unwrap();
        let ((fu, du), (fv, dv)) = (u.eval(d).unwrap(), v.eval(d).unwrap());
        let w = fu.conj() * dv - du.conj() * fv;
        let c2 = w / (2.0 * I * g.uu);
        assert!((c2 - disk.center).norm() < 1e-8 * (1.0 + c2.norm()));
    }
}

#[test]
fn points_on_the_circle() {
    let p = pot("x - 0.5i*x^2", 0.0, INF);
    let d = 1.5;
    let disk = weyl_disk(&p, I, d).unwrap();
    for k in 0..20 {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 20.0;
        let m = disk.center + disk.radius * C::new(t.cos(), t.sin());
        let w = solve_ivp(&p, I, 0.0, m, C::new(-1.0, 0.0), None, (0.0, d), &IvpOptions::default()).unwrap();
        let n = weighted_norm(&w, &p, I, d).unwrap();
        assert!((n - m.im).abs() < 1e-6 * (1.0 + m.im.abs()), "{n} {}", m.im);
        // Real boundary condition at d: W_d(w̄, w) = 0.
        let (f, df) = w.eval(d).unwrap();
        assert!((f.conj() * df - df.conj() * f).norm() < 1e-6 * (1.0 + f.norm() * df.norm()));
    }
}

#[test]
fn weighted_norm_basics() {
    let p = pot("0", 0.0, INF);
    let (u, _) = weyl_basis(&p, I, 2.0, &IvpOptions::default()).unwrap();
    assert!((weighted_norm(&u, &p, I, 2.0).unwrap() - free_norm(2.0)).abs() < 1e-9);
    let z = C::new(0.0, 0.0);
    let f = solve_ivp(&p, I, 0.0, z, z, None, (0.0, 2.0), &IvpOptions::default()).unwrap();
    assert_eq!(weighted_norm(&f, &p, I, 2.0).unwrap(), 0.0);
    let q = pot("1i*x", 0.0, INF);
    let g = solve_ivp(&q, I, 0.0, C::new(1.0, 0.0), z, None, (0.0, 2.0), &IvpOptions::default()).unwrap();
    assert!(matches!(weighted_norm(&g, &q, I, 2.0), Err(Error::NegativeWeight { .. })));
}

#[test]
fn disk_preconditions() {
    let p = pot("0", 0.0, INF);
    assert!(weyl_disk(&p, C::new(1.0, 0.0), 1.0).is_err());
    assert!(weyl_disk(&p, C::new(0.0, -1.0), 1.0).is_err());
    assert!(matches!(weyl_disk(&pot("1i*x", 0.0, INF), I, 1.0), Err(Error::NegativeWeight { .. })));
    assert!(matches!(weyl_disk(&pot("1/x^2", 0.0, INF), I, 1.0), Err(Error::NotRegular)));
}

#[test]
fn free_is_limit_point_with_one_l2_solution() {
    let r = trichotomy(&pot("0", 0.0, INF), I).unwrap();
    assert_eq!(r.case, TrichotomyCase::LimitPointOneL2);
    assert!(r.limit_radius_estimate < 1e-8);
    // w = mu + v ∝ e^{i√λ x} gives m = i/√i = √i.
    assert!((r.m_point_estimate.unwrap() - I.sqrt()).norm() < 1e-8);
    assert!(r.norm_table.last().unwrap().1 > 1e30);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["case"], "limit_point_one_L2");
}

#[test]
fn quartic_well_is_limit_circle() {
    let p = pot("-x^4", 0.0, INF);
    let r = trichotomy(&p, I).unwrap();
    assert_eq!(r.case, TrichotomyCase::LimitCircle);
    assert!(r.limit_radius_estimate > 1e-4);
    assert_eq!(r.dim_ub, 2);
    assert!(r.flags.is_empty(), "{:?}", r.flags);
    for w in r.disks.windows(2) {
        assert!(w[1].nested_in(&w[0], 0.0));
    }
    // mos4: a point of the final disk has ‖mu+v‖²_U ≤ Im m.
    let last = r.disks.last().unwrap();
    let m = last.center;
    let w = solve_ivp(&p, I, 0.0, m, C::new(-1.0, 0.0), None, (0.0, last.d), &IvpOptions::default()).unwrap();
    assert!(weighted_norm(&w, &p, I, last.d).unwrap() <= m.im + 1e-6);
}

#[test]
fn finite_regular_end_is_limit_circle() {
    let r = trichotomy(&pot("x^2 - 1i", 0.0, 2.0), C::new(1.0, 1.0)).unwrap();
    assert_eq!(r.case, TrichotomyCase::LimitCircle);
    assert_eq!(r.dim_ub, 2);
}

#[test]
fn sims_readings() {
    let lit = trichotomy(&pot("x^6 - 1.5i*x^2", 1.0, INF), I).unwrap();
    assert!(lit.flags.iter().any(|f| f == "overflow_truncation"), "{:?}", lit.flags);
    assert_ne!(lit.case, TrichotomyCase::LimitCircle);
    let alt = trichotomy(&pot("-x^6 - 1.5i*x^2", 1.0, INF), I).unwrap();
    assert_eq!(alt.case, TrichotomyCase::LimitPointAllL2);
    assert_eq!(alt.dim_ub, 2);
}

#[test]
fn traces_are_deterministic_across_exec_modes() {
    let p = pot("x^2 - 1i", 0.0, INF);
    let ls = [I, C::new(1.0, 2.0)];
    let a = trichotomy_many(&p, &ls, &TailOptions::default(), Exec::Auto);
    let b = trichotomy_many(&p, &ls, &TailOptions::default(), Exec::Sequential);
    for (x, y) in a.iter().zip(&b) {
        let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
        assert_eq!(serde_json::to_string(x).unwrap(), serde_json::to_string(y).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn nesting_for_random_dissipative_potentials(c0 in (-2.0f64..2.0, -2.0f64..0.0), c1 in -2.0f64..2.0, s in 0.0f64..2.0, l in (-2.0f64..2.0, 0.1f64..2.0)) {
        let src = format!("({}+{}i) + {}*x - {}i*x^2", c0.0, c0.1, c1, s);
        let p = pot(&src, 0.0, 3.0);
        let lam = C::new(l.0, l.1);
        let d: Vec<_> = [0.5, 1.0, 2.0, 2.9].iter().map(|d| weyl_disk(&p, lam, *d).unwrap()).collect();
        for w in d.windows(2) {
            let slack = 1e-9 * (w[0].radius + w[0].center.norm());
            prop_assert!(w[1].nested_in(&w[0], slack));
        }
        let g = weyl_gram(&p, lam, 2.0).unwrap();
        let disk = g.disk(lam).unwrap();
        for k in 0..8 {
            let t = k as f64 * 0.785;
            let m = disk.center + disk.radius * C::new(t.cos(), t.sin());
            prop_assert!((g.norm_of(m) - m.im).abs() < 1e-8 * (1.0 + m.im.abs()) * (1.0 + g.uu));
        }
    }
}
