//! Eigenvalues and resolvents of separated realizations L_{φ,ψ}, plus a
//! finite-difference oracle.

pub mod fd;
mod roots;

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::boundary::{boundary_index, wronskian_at_endpoint, BoundarySpec, FunctionalRepr};
use crate::error::{Error, Result};
use crate::greens::{build_kernel, GreensKernel, KernelKind};
use crate::ivp::{solve_ivp, solve_variational, IvpOptions, SolutionTrajectory, State};
use crate::par::Exec;
use crate::potential::{Endpoint, Potential};

pub use roots::{find_roots, Region, Root, SearchBudget};

/// How the solution attached to one endpoint is produced.
#[derive(Debug, Clone)]
pub enum EndCondition {
    /// (f, f′)(e) = (α₀, α₁) at a regular endpoint.
    Regular { alpha0: C, alpha1: C },
    /// ν = 0: the solution decaying toward e, started at `cutoff` with WKB data.
    Decay { cutoff: f64 },
    /// ν = 2 with a user-supplied representative g: W_e(g, f) = 0.
    Functional(SolutionTrajectory),
}

#[derive(Debug, Clone)]
pub struct Realization {
    pub potential: Potential,
    pub spec: BoundarySpec,
    ends: [EndCondition; 2],
}

/// ∫ Re√(V−λ) reached at the automatic cutoff: a decay factor of e^−36.
const CUTOFF_DECAY: f64 = 36.0;

fn auto_cutoff(p: &Potential, e: Endpoint, lambda: C) -> Result<f64> {
    let iv = p.interval();
    let start = iv.anchor();
    let sgn = if e == Endpoint::B { 1.0 } else { -1.0 };
    let x_e = iv.end(e);
    let (mut acc, mut x, mut h) = (0.0, start, 0.05);
    while acc < CUTOFF_DECAY {
        let next = x + sgn * h;
        if x_e.is_finite() && (next - x_e) * sgn >= 0.0 {
            return Err(Error::Unsupported(format!("no decay cutoff before the finite endpoint {x_e}")));
        }
        if (next - start).abs() > 1e4 {
            return Err(Error::Budget("decay cutoff beyond 1e4 from the anchor".into()));
        }
        let k = (p.eval(0.5 * (x + next)) - lambda).sqrt();
        acc += k.re.abs() * h;
        x = next;
        h = (h * 1.25).min(1.0);
    }
    Ok(x)
}

impl Realization {
    /// Classifies each endpoint: regular vectors shoot from the endpoint,
    /// ν = 0 endpoints (which must carry no condition) use decay, and ν = 2
    /// endpoints need a condition.
    pub fn new(p: Potential, spec: BoundarySpec) -> Result<Realization> {
        let mut ends = Vec::with_capacity(2);
        for e in [Endpoint::A, Endpoint::B] {
            let f = spec.at(e);
            let regular = p.interval().end(e).is_finite() && p.is_regular(e)?;
            let cond = match f.map(|f| &f.repr) {
                Some(FunctionalRepr::RegularVector { alpha0, alpha1 }) => EndCondition::Regular { alpha0: *alpha0, alpha1: *alpha1 },
                Some(FunctionalRepr::Zero) | None if !regular && boundary_index(&p, e)? == 0 => {
                    EndCondition::Decay { cutoff: auto_cutoff(&p, e, C::new(0.0, 1.0))? }
                }
                Some(FunctionalRepr::Zero) | None => {
                    return Err(Error::Unsupported(format!("endpoint {e:?} has ν = 2 and needs a boundary condition")));
                }
                Some(FunctionalRepr::Trajectory(g)) => {
                    if !regular && boundary_index(&p, e)? == 0 {
                        return Err(Error::InvalidArgument(format!("endpoint {e:?} has ν = 0 and admits no boundary condition")));
                    }
                    EndCondition::Functional(g.clone())
                }
            };
            ends.push(cond);
        }
        let b = ends.pop().expect("two ends");
        let a = ends.pop().expect("two ends");
        Ok(Realization { potential: p, spec, ends: [a, b] })
    }

    pub fn end(&self, e: Endpoint) -> &EndCondition {
        &self.ends[e as usize]
    }

    /// Moves the decay start at a ν = 0 endpoint.
    pub fn with_cutoff(mut self, e: Endpoint, cutoff: f64) -> Result<Realization> {
        match &mut self.ends[e as usize] {
            EndCondition::Decay { cutoff: c } => {
                let anchor = self.potential.interval().anchor();
                if !self.potential.interval().contains_open(cutoff) || (cutoff - anchor) * (if e == Endpoint::B { 1.0 } else { -1.0 }) <= 0.0 {
                    return Err(Error::InvalidArgument(format!("cutoff {cutoff} must lie beyond the anchor {anchor}")));
                }
                *c = cutoff;
                Ok(self)
            }
            _ => Err(Error::InvalidArgument(format!("endpoint {e:?} has no decay cutoff"))),
        }
    }

    fn has_decay(&self) -> bool {
        self.ends.iter().any(|c| matches!(c, EndCondition::Decay { .. }))
    }

    /// Matching point for the two shooting solutions.
    fn matching_point(&self) -> f64 {
        self.potential.interval().anchor()
    }

    /// Window the shooting solutions cover, for kernels and the oracle.
    pub fn window(&self) -> (f64, f64) {
        let iv = self.potential.interval();
        let lim = |e: Endpoint| match self.end(e) {
            EndCondition::Regular { .. } => iv.end(e),
            EndCondition::Decay { cutoff } => *cutoff,
            EndCondition::Functional(g) => {
                if e == Endpoint::A {
                    g.span().0
                } else {
                    g.span().1
                }
            }
        };
        (lim(Endpoint::A), lim(Endpoint::B))
    }
}

fn finite_at(p: &Potential, x: f64, toward: f64) -> bool {
    let v = p.eval_sel(x, x + 1e-9 * (toward - x));
    v.re.is_finite() && v.im.is_finite()
}

/// (f, f′) at x0 for the solution attached to `e`, and (∂λf, ∂λf′) when
/// `with_derivative` and the start admits the variational system.
fn end_state(r: &Realization, e: Endpoint, lambda: C, x0: f64, with_derivative: bool, opts: &IvpOptions) -> Result<(State<2>, Option<State<2>>)> {
    let p = &r.potential;
    let zero = C::new(0.0, 0.0);
    let variational = |d: f64, y0: State<4>| -> Result<(State<2>, Option<State<2>>)> {
        let y = solve_variational(p, lambda, d, y0, x0, opts)?;
        Ok(([y[0], y[1]], Some([y[2], y[3]])))
    };
    match r.end(e) {
        EndCondition::Regular { alpha0, alpha1 } => {
            let d = p.interval().end(e);
            if with_derivative && finite_at(p, d, x0) {
                return variational(d, [*alpha0, *alpha1, zero, zero]);
            }
            let span = if d < x0 { (d, x0) } else { (x0, d) };
            let f = solve_ivp(p, lambda, d, *alpha0, *alpha1, None, span, opts)?;
            let (v, dv) = f.eval(x0)?;
            Ok(([v, dv], None))
        }
        EndCondition::Decay { cutoff } => {
            let k = (p.eval(*cutoff) - lambda).sqrt();
            let k = if k.re < 0.0 { -k } else { k };
            // f′ = ∓k with dk/dλ = −1/(2k).
            let (s, ds) = if e == Endpoint::B { (-k, 0.5 / k) } else { (k, -0.5 / k) };
            if with_derivative {
                return variational(*cutoff, [C::new(1.0, 0.0), s, zero, ds]);
            }
            let span = if *cutoff < x0 { (*cutoff, x0) } else { (x0, *cutoff) };
            let f = solve_ivp(p, lambda, *cutoff, C::new(1.0, 0.0), s, None, span, opts)?;
            let (v, dv) = f.eval(x0)?;
            Ok(([v, dv], None))
        }
        EndCondition::Functional(g) => {
            // u = W_e(g,φ₂)φ₁ − W_e(g,φ₁)φ₂ with φ₁ = (1,0), φ₂ = (0,1) at x0.
            let span = if e == Endpoint::A { (g.span().0, x0) } else { (x0, g.span().1) };
            let phi1 = solve_ivp(p, lambda, x0, C::new(1.0, 0.0), zero, None, span, opts)?;
            let phi2 = solve_ivp(p, lambda, x0, zero, C::new(1.0, 0.0), None, span, opts)?;
            let iv = p.interval();
            let lim = |f: &SolutionTrajectory| -> Result<C> {
                let l = wronskian_at_endpoint(iv, g, f, e)?;
                if l.converged {
                    Ok(l.value)
                } else {
                    Err(Error::LimitUndetermined { samples: l.samples.iter().map(|(x, w)| (*x, w.re, w.im)).collect() })
                }
            };
            Ok(([lim(&phi2)?, -lim(&phi1)?], None))
        }
    }
}

/// W(v_λ, u_λ) at the matching point: u satisfies the condition at a, v the
/// one at b. Zero exactly at eigenvalues.
pub fn characteristic_wronskian(r: &Realization, lambda: C) -> Result<C> {
    let x0 = r.matching_point();
    let o = IvpOptions::default();
    let (u, _) = end_state(r, Endpoint::A, lambda, x0, false, &o)?;
    let (v, _) = end_state(r, Endpoint::B, lambda, x0, false, &o)?;
    Ok(v[0] * u[1] - v[1] * u[0])
}

/// (W, dW/dλ). The derivative comes from the variational system where both
/// starts allow it, otherwise from a central difference.
pub fn characteristic_with_derivative(r: &Realization, lambda: C) -> Result<(C, C)> {
    let x0 = r.matching_point();
    let o = IvpOptions::default();
    let (u, du) = end_state(r, Endpoint::A, lambda, x0, true, &o)?;
    let (v, dv) = end_state(r, Endpoint::B, lambda, x0, true, &o)?;
    let w = v[0] * u[1] - v[1] * u[0];
    if let (Some(du), Some(dv)) = (du, dv) {
        return Ok((w, dv[0] * u[1] + v[0] * du[1] - dv[1] * u[0] - v[1] * du[0]));
    }
    let h = 1e-6 * (1.0 + lambda.norm());
    let wp = characteristic_wronskian(r, lambda + h)?;
    let wm = characteristic_wronskian(r, lambda - h)?;
    Ok((w, (wp - wm) / (2.0 * h)))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Eigenvalue {
    pub lambda: C,
    /// |W(λ)| over the largest |W| on the region boundary.
    pub residual: f64,
    pub multiplicity: usize,
    /// |Δλ| when a decay cutoff is doubled; absent without decay ends.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff_shift: Option<f64>,
}

pub fn find_eigenvalues(r: &Realization, region: Region, budget: SearchBudget) -> Result<Vec<Eigenvalue>> {
    find_eigenvalues_with(r, region, budget, Exec::Auto)
}

pub fn find_eigenvalues_with(r: &Realization, region: Region, budget: SearchBudget, exec: Exec) -> Result<Vec<Eigenvalue>> {
    let f = |l: C| characteristic_wronskian(r, l);
    let df = |l: C| characteristic_with_derivative(r, l);
    let roots = find_roots(&f, &df, region, budget, exec)?;
    let doubled = if r.has_decay() {
        let mut d = r.clone();
        let x0 = r.matching_point();
        for e in [Endpoint::A, Endpoint::B] {
            if let EndCondition::Decay { cutoff } = r.end(e) {
                let far = x0 + 2.0 * (cutoff - x0);
                let far = if r.potential.interval().contains_open(far) { far } else { 0.5 * (cutoff + r.potential.interval().end(e)) };
                d = d.with_cutoff(e, far)?;
            }
        }
        Some(d)
    } else {
        None
    };
    Ok(roots
        .into_iter()
        .map(|root| {
            let cutoff_shift = doubled.as_ref().map(|d| newton_polish(d, root.lambda).map_or(f64::NAN, |z| (z - root.lambda).norm()));
            Eigenvalue { lambda: root.lambda, residual: root.residual, multiplicity: root.multiplicity, cutoff_shift }
        })
        .collect())
}

fn newton_polish(r: &Realization, mut z: C) -> Result<C> {
    for _ in 0..30 {
        let (w, dw) = characteristic_with_derivative(r, z)?;
        let step = w / dw;
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    Ok(z)
}

/// Solution attached to `e` as a trajectory over `window`.
fn end_solution(r: &Realization, e: Endpoint, lambda: C, window: (f64, f64), opts: &IvpOptions) -> Result<SolutionTrajectory> {
    let p = &r.potential;
    match r.end(e) {
        EndCondition::Regular { alpha0, alpha1 } => solve_ivp(p, lambda, p.interval().end(e), *alpha0, *alpha1, None, window, opts),
        EndCondition::Decay { cutoff } => {
            let k = (p.eval(*cutoff) - lambda).sqrt();
            let k = if k.re < 0.0 { -k } else { k };
            let s = if e == Endpoint::B { -k } else { k };
            solve_ivp(p, lambda, *cutoff, C::new(1.0, 0.0), s, None, window, opts)
        }
        EndCondition::Functional(_) => {
            let x0 = r.matching_point();
            let (y, _) = end_state(r, e, lambda, x0, false, opts)?;
            solve_ivp(p, lambda, x0, y[0], y[1], None, window, opts)
        }
    }
}

/// (L_{φ,ψ} − λ)⁻¹ as the two-sided kernel of the shooting solutions.
pub fn resolvent_kernel(r: &Realization, lambda: C) -> Result<GreensKernel> {
    let o = IvpOptions::default();
    let window = r.window();
    let u = end_solution(r, Endpoint::A, lambda, window, &o)?;
    let v = end_solution(r, Endpoint::B, lambda, window, &o)?;
    let x0 = r.matching_point();
    let ((fu, du), (fv, dv)) = (u.eval(x0)?, v.eval(x0)?);
    let w = fv * du - dv * fu;
    let scale = (fu.norm() + du.norm()) * (fv.norm() + dv.norm());
    if w.norm() < 1e-8 * scale {
        return Err(Error::NearEigenvalue { wronskian: w.norm() / scale });
    }
    build_kernel(KernelKind::TwoSided, &u, &v)
}
