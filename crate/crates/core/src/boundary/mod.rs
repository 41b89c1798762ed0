//! Boundary functionals, boundary indices and dissipative realizations.

mod dissipative;
mod limits;
mod tails;

use num_complex::Complex64 as C;
use serde::Serialize;

pub use dissipative::{dissipativity_certificate, im_v_probes, Certificate};
pub use limits::{wronskian_at_endpoint, EndpointLimit};
pub(crate) use limits::quantity_at_endpoint;
pub use tails::{
    approach_from, decaying_candidate, dim_u, dim_u_report, partial_integrals, tail_points, tail_verdict, DimReport, TailOptions, TailRecord, TailVerdict,
};

use crate::error::{Error, Result};
use crate::ivp::SolutionTrajectory;
use crate::par::{self, Exec};
use crate::potential::{Endpoint, Interval, Potential};
use crate::quad::{mesh_integrate, merge_meshes};

#[derive(Debug, Clone)]
pub enum FunctionalRepr {
    /// f ↦ α₀f′(e) − α₁f(e) at a regular endpoint, i.e. W_e(g,f) for any g
    /// with (g(e), g′(e)) = (α₀, α₁).
    RegularVector { alpha0: C, alpha1: C },
    /// f ↦ W_e(g, f).
    Trajectory(SolutionTrajectory),
    Zero,
}

#[derive(Debug, Clone)]
pub struct BoundaryFunctional {
    pub endpoint: Endpoint,
    pub repr: FunctionalRepr,
}

impl BoundaryFunctional {
    pub fn regular(p: &Potential, endpoint: Endpoint, alpha0: C, alpha1: C) -> Result<BoundaryFunctional> {
        if !p.is_regular(endpoint)? {
            return Err(Error::NotRegular);
        }
        if alpha0 == C::new(0.0, 0.0) && alpha1 == C::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("regular vector (0,0); use BoundaryFunctional::zero".into()));
        }
        Ok(BoundaryFunctional { endpoint, repr: FunctionalRepr::RegularVector { alpha0, alpha1 } })
    }

    /// f(e) = 0.
    pub fn dirichlet(p: &Potential, endpoint: Endpoint) -> Result<BoundaryFunctional> {
        BoundaryFunctional::regular(p, endpoint, C::new(0.0, 0.0), C::new(1.0, 0.0))
    }

    /// f′(e) = 0.
    pub fn neumann(p: &Potential, endpoint: Endpoint) -> Result<BoundaryFunctional> {
        BoundaryFunctional::regular(p, endpoint, C::new(1.0, 0.0), C::new(0.0, 0.0))
    }

    pub fn trajectory(endpoint: Endpoint, g: SolutionTrajectory) -> BoundaryFunctional {
        BoundaryFunctional { endpoint, repr: FunctionalRepr::Trajectory(g) }
    }

    pub fn zero(endpoint: Endpoint) -> BoundaryFunctional {
        BoundaryFunctional { endpoint, repr: FunctionalRepr::Zero }
    }

    pub fn regular_vector(&self) -> Option<(C, C)> {
        match self.repr {
            FunctionalRepr::RegularVector { alpha0, alpha1 } => Some((alpha0, alpha1)),
            _ => None,
        }
    }

    pub fn apply(&self, iv: Interval, f: &SolutionTrajectory) -> Result<C> {
        let e = self.endpoint;
        match &self.repr {
            FunctionalRepr::Zero => Ok(C::new(0.0, 0.0)),
            FunctionalRepr::RegularVector { alpha0, alpha1 } => {
                let (lo, hi) = f.span();
                let q = |x: f64| -> Result<C> {
                    let (v, d) = f.eval(x)?;
                    Ok(*alpha0 * d - *alpha1 * v)
                };
                require(quantity_at_endpoint(iv, e, lo, hi, q)?)
            }
            FunctionalRepr::Trajectory(g) => require(wronskian_at_endpoint(iv, g, f, e)?),
        }
    }
}

fn require(l: EndpointLimit) -> Result<C> {
    if l.converged {
        Ok(l.value)
    } else {
        Err(Error::LimitUndetermined { samples: l.samples.iter().map(|(x, w)| (*x, w.re, w.im)).collect() })
    }
}

/// Separated boundary conditions; `None` leaves that side maximal.
#[derive(Debug, Clone, Default)]
pub struct BoundarySpec {
    pub at_a: Option<BoundaryFunctional>,
    pub at_b: Option<BoundaryFunctional>,
}

impl BoundarySpec {
    pub fn new(at_a: Option<BoundaryFunctional>, at_b: Option<BoundaryFunctional>) -> Result<BoundarySpec> {
        for (f, e) in [(&at_a, Endpoint::A), (&at_b, Endpoint::B)] {
            if let Some(f) = f {
                if f.endpoint != e {
                    return Err(Error::InvalidArgument(format!("functional for endpoint {e:?} placed on the other side")));
                }
            }
        }
        Ok(BoundarySpec { at_a, at_b })
    }

    pub fn at(&self, e: Endpoint) -> Option<&BoundaryFunctional> {
        match e {
            Endpoint::A => self.at_a.as_ref(),
            Endpoint::B => self.at_b.as_ref(),
        }
    }
}

/// ⟦φ|ψ⟧ = W_e(g_φ, g_ψ) for representatives; α₀β₁ − α₁β₀ for regular vectors.
pub fn symplectic_form(iv: Interval, phi: &BoundaryFunctional, psi: &BoundaryFunctional) -> Result<C> {
    if phi.endpoint != psi.endpoint {
        return Err(Error::InvalidArgument("functionals at different endpoints".into()));
    }
    use FunctionalRepr::*;
    match (&phi.repr, &psi.repr) {
        (Zero, _) | (_, Zero) => Ok(C::new(0.0, 0.0)),
        (RegularVector { alpha0, alpha1 }, RegularVector { alpha0: b0, alpha1: b1 }) => Ok(alpha0 * b1 - alpha1 * b0),
        (_, Trajectory(g)) => phi.apply(iv, g),
        (Trajectory(g), _) => Ok(-psi.apply(iv, g)?),
    }
}

/// ν_e ∈ {0, 2}: 2 exactly when every solution at λ = i is square
/// integrable near e.
pub fn boundary_index(p: &Potential, e: Endpoint) -> Result<u8> {
    Ok(if dim_u(p, e, C::new(0.0, 1.0))? == 2 { 2 } else { 0 })
}

#[derive(Debug, Clone, Serialize)]
pub struct Evidence {
    pub a: DimReport,
    pub b: DimReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub nu_a: u8,
    pub nu_b: u8,
    #[serde(rename = "dim_Ua")]
    pub dim_ua: usize,
    #[serde(rename = "dim_Ub")]
    pub dim_ub: usize,
    pub lambda: C,
    pub evidence: Evidence,
}

pub fn classify(p: &Potential, lambda: C, opts: &TailOptions, exec: Exec) -> Result<ClassificationReport> {
    let (a, b) = par::join(exec, || dim_u_report(p, Endpoint::A, lambda, opts, exec), || dim_u_report(p, Endpoint::B, lambda, opts, exec));
    let (a, b) = (a?, b?);
    let nu = |d: usize| if d == 2 { 2 } else { 0 };
    Ok(ClassificationReport { nu_a: nu(a.dim), nu_b: nu(b.dim), dim_ua: a.dim, dim_ub: b.dim, lambda, evidence: Evidence { a, b } })
}

/// ⟨Lf|g⟩ − ⟨f|Lg⟩ − W_b(f,g) + W_a(f,g), with the bilinear pairing over the
/// common span and endpoint Wronskians taken as limits.
pub fn greens_identity_residual(iv: Interval, f: &SolutionTrajectory, g: &SolutionTrajectory) -> Result<C> {
    let (lo, hi) = (f.span().0.max(g.span().0), f.span().1.min(g.span().1));
    if lo >= hi {
        return Err(Error::InvalidArgument("trajectories do not overlap".into()));
    }
    let mut extra = Vec::new();
    for s in [f.rhs(), g.rhs()].into_iter().flatten() {
        extra.extend(s.breaks());
    }
    let c = 0.5 * (lo + hi);
    extra.push(c);
    let mut mesh = merge_meshes(&f.mesh(), &g.mesh(), lo, hi);
    mesh = merge_meshes(&mesh, &extra, lo, hi);
    let density = |x: f64| {
        let (Ok(lf), Ok(lg), Ok(fx), Ok(gx)) = (f.l_apply(x), g.l_apply(x), f.value(x), g.value(x)) else {
            return C::new(f64::NAN, 0.0);
        };
        lf * gx - fx * lg
    };
    // Cumulative ∫_c^x on the mesh nodes.
    let ic = mesh.partition_point(|x| *x < c);
    let mut cum = vec![C::new(0.0, 0.0); mesh.len()];
    for k in ic + 1..mesh.len() {
        cum[k] = cum[k - 1] + mesh_integrate(density, &mesh[k - 1..=k]);
    }
    for k in (0..ic).rev() {
        cum[k] = cum[k + 1] - mesh_integrate(density, &mesh[k..=k + 1]);
    }
    let integral_to = |x: f64| {
        let k = mesh.partition_point(|m| *m <= x).saturating_sub(1);
        if mesh[k] == x {
            cum[k]
        } else {
            cum[k] + mesh_integrate(density, &[mesh[k], x])
        }
    };
    // ∫_c^x (Lf)g − f(Lg) − W(f,g;x) is constant in x; its endpoint limits
    // give the identity without truncating the integral.
    let q = |x: f64| -> Result<C> {
        let (a, da) = f.eval(x)?;
        let (b, db) = g.eval(x)?;
        Ok(integral_to(x) - (a * db - da * b))
    };
    let qa = require(limits::quantity_at_endpoint(iv, Endpoint::A, lo, hi, q)?)?;
    let qb = require(limits::quantity_at_endpoint(iv, Endpoint::B, lo, hi, q)?)?;
    Ok(qb - qa)
}
