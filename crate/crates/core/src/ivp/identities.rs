use num_complex::Complex64 as C;

use super::SolutionTrajectory;
use crate::error::{Error, Result};
use crate::quad::{integrate, merge_meshes, QuadOpts};

/// W(u,v;x) = u(x)v′(x) − u′(x)v(x).
pub fn wronskian(u: &SolutionTrajectory, v: &SolutionTrajectory, x: f64) -> Result<C> {
    let (f, fp) = u.eval(x)?;
    let (g, gp) = v.eval(x)?;
    Ok(f * gp - fp * g)
}

/// ∫_{x1}^{x2} ((Lu)v − u(Lv)) − W(u,v;x2) + W(u,v;x1), which vanishes
/// because ∂W(u,v) = (Lu)v − u(Lv).
pub fn lagrange_residual(u: &SolutionTrajectory, v: &SolutionTrajectory, x1: f64, x2: f64) -> Result<C> {
    let (ul, uh) = u.span();
    let (vl, vh) = v.span();
    let (lo, hi) = (ul.max(vl), uh.min(vh));
    if x1.min(x2) < lo || x1.max(x2) > hi {
        return Err(Error::OutOfSpan { x: if x1.min(x2) < lo { x1.min(x2) } else { x1.max(x2) }, lo, hi });
    }
    let (a, b) = (x1.min(x2), x1.max(x2));
    let mut pts = merge_meshes(&u.mesh(), &v.mesh(), a, b);
    for g in [u.rhs(), v.rhs()].into_iter().flatten() {
        pts.extend(g.breaks());
    }
    let integrand = |x: f64| {
        let lu = u.l_apply(x).unwrap_or(C::new(f64::NAN, 0.0));
        let lv = v.l_apply(x).unwrap_or(C::new(f64::NAN, 0.0));
        let uu = u.value(x).unwrap_or(C::new(f64::NAN, 0.0));
        let vv = v.value(x).unwrap_or(C::new(f64::NAN, 0.0));
        lu * vv - uu * lv
    };
    let opts = QuadOpts { rel_tol: 1e-12, abs_tol: 1e-15, max_panels: 1_000_000 };
    let i = integrate(integrand, x1, x2, &pts, opts)?.value;
    Ok(i - wronskian(u, v, x2)? + wronskian(u, v, x1)?)
}

/// W(f,g)W(h,k) + W(g,h)W(f,k) + W(h,f)W(g,k) for (value, derivative) pairs.
pub fn kodaira_check(f: (C, C), g: (C, C), h: (C, C), k: (C, C)) -> C {
    let w = |a: (C, C), b: (C, C)| a.0 * b.1 - a.1 * b.0;
    w(f, g) * w(h, k) + w(g, h) * w(f, k) + w(h, f) * w(g, k)
}
