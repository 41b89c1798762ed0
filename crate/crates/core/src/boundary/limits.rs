//! Limits of x-dependent quantities at an endpoint.

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivp::SolutionTrajectory;
use crate::potential::{Endpoint, Interval};

#[derive(Debug, Clone, Serialize)]
pub struct EndpointLimit {
    pub value: C,
    /// True when the value was read off at the endpoint itself or the
    /// sample sequence settled.
    pub converged: bool,
    pub samples: Vec<(f64, C)>,
}

/// Geometric approach points to `e` inside `[lo, hi]`, starting at `start`.
pub(crate) fn approach_points(iv: Interval, e: Endpoint, start: f64, lo: f64, hi: f64) -> Vec<f64> {
    let x_e = iv.end(e);
    let mut pts = Vec::new();
    if x_e.is_finite() {
        for k in 0..64 {
            let x = x_e + (start - x_e) * 0.5f64.powi(k);
            if x == x_e || (x - x_e).abs() < 1e4 * f64::EPSILON * x_e.abs().max(1e-300) {
                break;
            }
            if x >= lo && x <= hi {
                pts.push(x);
            }
        }
    } else {
        let sgn = if e == Endpoint::B { 1.0 } else { -1.0 };
        for k in 0..200 {
            let x = start + sgn * (std::f64::consts::SQRT_2.powi(k) - 1.0);
            if x < lo || x > hi {
                break;
            }
            pts.push(x);
        }
    }
    let last = if e == Endpoint::B { hi } else { lo };
    if pts.last().is_some_and(|p| *p != last) && (last - start) * (x_e - start) > 0.0 {
        pts.push(last);
    }
    pts
}

/// Limit of `q(x)` as x → e along `points`, which must approach e.
pub(crate) fn sequence_limit(points: &[f64], q: impl Fn(f64) -> Result<C>) -> Result<EndpointLimit> {
    let samples: Vec<(f64, C)> = points.iter().map(|x| Ok((*x, q(*x)?))).collect::<Result<_>>()?;
    let n = samples.len();
    let fail = |s: &[(f64, C)]| Error::LimitUndetermined { samples: s.iter().map(|(x, w)| (*x, w.re, w.im)).collect() };
    if n < 4 {
        return Err(fail(&samples));
    }
    let w: Vec<C> = samples.iter().map(|s| s.1).collect();
    let scale = w.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let d: Vec<f64> = w.windows(2).map(|p| (p[1] - p[0]).norm()).collect();
    let tol = 1e-8 * (1.0 + scale);
    let tail = &d[d.len() - 3..];
    if tail.iter().all(|x| *x <= tol) {
        return Ok(EndpointLimit { value: w[n - 1], converged: true, samples });
    }
    // Geometric decay of differences: Aitken extrapolation.
    let geometric = tail.windows(2).all(|p| p[1] <= 0.9 * p[0]);
    if geometric {
        let (a, b, c) = (w[n - 3], w[n - 2], w[n - 1]);
        let den = c - 2.0 * b + a;
        let value = if den.norm() > 0.0 { c - (c - b) * (c - b) / den } else { c };
        let r = tail[2] / tail[1];
        if (value - c).norm() <= 10.0 * tail[2] * r / (1.0 - r) + tol {
            return Ok(EndpointLimit { value, converged: true, samples });
        }
    }
    Err(fail(&samples))
}

fn common_span(f: &SolutionTrajectory, g: &SolutionTrajectory) -> Result<(f64, f64)> {
    let (a, b) = (f.span(), g.span());
    let (lo, hi) = (a.0.max(b.0), a.1.min(b.1));
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(Error::InvalidArgument("trajectories do not overlap".into()))
    }
}

/// lim W(f,g;x) as x → e. Read off directly when both trajectories reach a
/// finite endpoint.
pub fn wronskian_at_endpoint(iv: Interval, f: &SolutionTrajectory, g: &SolutionTrajectory, e: Endpoint) -> Result<EndpointLimit> {
    let (lo, hi) = common_span(f, g)?;
    let w = |x: f64| -> Result<C> {
        let (a, da) = f.eval(x)?;
        let (b, db) = g.eval(x)?;
        Ok(a * db - da * b)
    };
    quantity_at_endpoint(iv, e, lo, hi, w)
}

/// lim q(x) as x → e for a quantity defined on `[lo, hi]`.
pub(crate) fn quantity_at_endpoint(iv: Interval, e: Endpoint, lo: f64, hi: f64, q: impl Fn(f64) -> Result<C>) -> Result<EndpointLimit> {
    let x_e = iv.end(e);
    let reach = if e == Endpoint::A { lo } else { hi };
    if x_e.is_finite() && reach == x_e {
        let value = q(x_e)?;
        return Ok(EndpointLimit { value, converged: true, samples: vec![(x_e, value)] });
    }
    let start = if x_e.is_finite() {
        0.5 * (lo + hi)
    } else if e == Endpoint::A {
        hi
    } else {
        lo
    };
    let pts = approach_points(iv, e, start, lo, hi);
    sequence_limit(&pts, q)
}
