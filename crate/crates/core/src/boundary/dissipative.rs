//! Sufficient conditions for L_{α,β} to be maximal dissipative.

use num_complex::Complex64 as C;
use serde::Serialize;

use super::{boundary_index, quantity_at_endpoint, BoundarySpec, FunctionalRepr};
use crate::error::{Error, Result};
use crate::potential::{Endpoint, Potential};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Certificate {
    CertifiedMaximalDissipative { probes: usize, max_im_v: f64 },
    NotCertified { reason: String },
}

const PROBES: usize = 1000;

/// Quasi-random interior points (golden-ratio sequence) plus both sides of
/// every breakpoint.
pub fn im_v_probes(p: &Potential) -> Vec<f64> {
    let iv = p.interval();
    let phi = 0.618_033_988_749_894_9;
    let map = |t: f64| match (iv.a.is_finite(), iv.b.is_finite()) {
        (true, true) => iv.a + t * (iv.b - iv.a),
        (true, false) => iv.a + t / (1.0 - t),
        (false, true) => iv.b - (1.0 - t) / t,
        (false, false) => (std::f64::consts::PI * (t - 0.5)).tan(),
    };
    let mut xs: Vec<f64> = (0..PROBES).map(|k| map((0.5 + k as f64 * phi).fract())).filter(|x| iv.contains_open(*x)).collect();
    for b in p.breakpoints() {
        let d = 1e-9 * b.abs().max(1.0);
        xs.extend([b - d, b + d].into_iter().filter(|x| iv.contains_open(*x)));
    }
    xs
}

pub fn dissipativity_certificate(p: &Potential, spec: &BoundarySpec) -> Result<Certificate> {
    let probes = im_v_probes(p);
    let mut max_im = f64::NEG_INFINITY;
    for &x in &probes {
        let v = p.eval(x);
        if !v.im.is_finite() {
            return Err(Error::SignIndeterminate { x });
        }
        if v.im > 1e-14 * v.norm() {
            return Ok(Certificate::NotCertified { reason: format!("Im V = {:e} > 0 at x = {x}", v.im) });
        }
        max_im = max_im.max(v.im);
    }
    let iv = p.interval();
    for e in [Endpoint::A, Endpoint::B] {
        // (1/2i)⟦φ̄|φ⟧ must be ≤ 0 at a and ≥ 0 at b.
        let sign = if e == Endpoint::A { 1.0 } else { -1.0 };
        let name = if e == Endpoint::A { "a" } else { "b" };
        let repr = spec.at(e).map(|f| &f.repr);
        let s = match repr {
            None | Some(FunctionalRepr::Zero) => {
                if boundary_index(p, e)? == 2 {
                    return Ok(Certificate::NotCertified { reason: format!("no boundary condition at {name} although ν_{name} = 2") });
                }
                continue;
            }
            Some(FunctionalRepr::RegularVector { alpha0, alpha1 }) => ((alpha0.conj() * alpha1).im, alpha0.norm_sqr() + alpha1.norm_sqr()),
            Some(FunctionalRepr::Trajectory(g)) => {
                let (lo, hi) = g.span();
                let q = |x: f64| -> Result<C> {
                    let (v, d) = g.eval(x)?;
                    Ok(C::new((v.conj() * d).im, 0.0))
                };
                let l = quantity_at_endpoint(iv, e, lo, hi, q)?;
                if !l.converged {
                    return Err(Error::LimitUndetermined { samples: l.samples.iter().map(|(x, w)| (*x, w.re, w.im)).collect() });
                }
                let scale = l.samples.iter().map(|(_, w)| w.norm()).fold(1.0, f64::max);
                (l.value.re, scale)
            }
        };
        if sign * s.0 > 1e-12 * s.1 {
            let rel = if e == Endpoint::A { "> 0" } else { "< 0" };
            return Ok(Certificate::NotCertified { reason: format!("boundary sign condition violated at {name}: Im(conj(f) f') = {:e} {rel}", s.0) });
        }
    }
    Ok(Certificate::CertifiedMaximalDissipative { probes: probes.len(), max_im_v: max_im })
}
