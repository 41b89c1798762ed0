//! Green's kernels built from two solutions u, v of Lf = λf, normalized so
//! that W(v,u) = 1.

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivp::{wronskian, SolutionTrajectory, Source};
use crate::par::{self, Exec};
use crate::quad::{integrate, QuadOpts};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Bisolution,
    TwoSided,
    Forward,
    Backward,
    AtD(f64),
}

impl KernelKind {
    /// `"two_sided"`, `"forward"`, `"backward"`, `"bisolution"`, or `"at_d:<d>"`.
    pub fn parse(s: &str) -> Result<KernelKind> {
        Ok(match s {
            "two_sided" => KernelKind::TwoSided,
            "forward" => KernelKind::Forward,
            "backward" => KernelKind::Backward,
            "bisolution" => KernelKind::Bisolution,
            _ => match s.strip_prefix("at_d:").map(str::parse::<f64>) {
                Some(Ok(d)) if d.is_finite() => KernelKind::AtD(d),
                _ => return Err(Error::InvalidArgument(format!("unknown kernel kind {s:?}"))),
            },
        })
    }
}

#[derive(Debug, Clone)]
pub struct GreensKernel {
    pub kind: KernelKind,
    /// Stored with v already divided by `normalization`.
    u: SolutionTrajectory,
    v: SolutionTrajectory,
    /// W(v,u) of the solutions as supplied.
    pub normalization: C,
}

const DEGENERATE: f64 = 1e-8;

pub fn build_kernel(kind: KernelKind, u: &SolutionTrajectory, v: &SolutionTrajectory) -> Result<GreensKernel> {
    if !u.is_homogeneous() || !v.is_homogeneous() {
        return Err(Error::InvalidArgument("kernel solutions must be homogeneous".into()));
    }
    if (u.lambda - v.lambda).norm() > 1e-14 * (1.0 + u.lambda.norm()) {
        return Err(Error::InvalidArgument("kernel solutions have different λ".into()));
    }
    let (lo, hi) = common_span(u, v)?;
    let x = 0.5 * (lo + hi);
    let w = wronskian(v, u, x)?;
    let (fu, du) = u.eval(x)?;
    let (fv, dv) = v.eval(x)?;
    let scale = fu.norm() * dv.norm() + du.norm() * fv.norm();
    if !(w.norm() >= DEGENERATE * scale) || w.norm() == 0.0 {
        return Err(Error::DegenerateBasis { wronskian: w.norm() });
    }
    if let KernelKind::AtD(d) = kind {
        if !(lo < d && d < hi) {
            return Err(Error::OutOfSpan { x: d, lo, hi });
        }
    }
    Ok(GreensKernel { kind, u: u.clone(), v: v.scaled(1.0 / w), normalization: w })
}

fn common_span(u: &SolutionTrajectory, v: &SolutionTrajectory) -> Result<(f64, f64)> {
    let (a, b) = (u.span(), v.span());
    let (lo, hi) = (a.0.max(b.0), a.1.min(b.1));
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(Error::InvalidArgument("trajectories do not overlap".into()))
    }
}

impl GreensKernel {
    pub fn u(&self) -> &SolutionTrajectory {
        &self.u
    }

    /// Normalized v, with W(v,u) = 1.
    pub fn v(&self) -> &SolutionTrajectory {
        &self.v
    }

    pub fn span(&self) -> (f64, f64) {
        common_span(&self.u, &self.v).expect("checked at construction")
    }

    fn check(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.span();
        if x < lo || x > hi || x.is_nan() {
            return Err(Error::OutOfSpan { x, lo, hi });
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<C> {
        self.check(x)?;
        self.check(y)?;
        let u = |t| self.u.value(t);
        let v = |t| self.v.value(t);
        // v(x)u(y) − u(x)v(y); the forward and bisolution branch.
        let fwd = || -> Result<C> { Ok(v(x)? * u(y)? - u(x)? * v(y)?) };
        let zero = C::new(0.0, 0.0);
        Ok(match self.kind {
            KernelKind::Bisolution => fwd()?,
            KernelKind::TwoSided => {
                if x < y {
                    u(x)? * v(y)?
                } else {
                    v(x)? * u(y)?
                }
            }
            KernelKind::Forward => {
                if x > y {
                    fwd()?
                } else {
                    zero
                }
            }
            KernelKind::Backward => {
                if x < y {
                    -fwd()?
                } else {
                    zero
                }
            }
            KernelKind::AtD(d) => {
                if x < y && y < d {
                    -fwd()?
                } else if x > y && y > d {
                    fwd()?
                } else {
                    zero
                }
            }
        })
    }

    /// Points where the y-integrand may have a kink.
    fn splits(&self, x: f64, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = vec![x];
        if let KernelKind::AtD(d) = self.kind {
            pts.push(d);
        }
        pts.extend(self.u.mesh());
        pts.extend(self.v.mesh());
        pts.retain(|p| lo < *p && *p < hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

pub fn kernel_eval(k: &GreensKernel, x: f64, y: f64) -> Result<C> {
    k.eval(x, y)
}

pub(crate) const APPLY_OPTS: QuadOpts = QuadOpts { rel_tol: 1e-9, abs_tol: 1e-15, max_panels: 4000 };

/// ∫k(x,y)g(y)dy over the support of g.
pub fn apply_kernel(k: &GreensKernel, g: &Source, x: f64) -> Result<C> {
    let (lo, hi) = g.support().ok_or_else(|| Error::InvalidArgument("source must have compact support".into()))?;
    k.check(x)?;
    k.check(lo)?;
    k.check(hi)?;
    if lo >= hi {
        return Ok(C::new(0.0, 0.0));
    }
    let pts = k.splits(x, lo, hi);
    let r = integrate(|y| k.eval(x, y).unwrap_or(C::new(f64::NAN, 0.0)) * g.eval(y), lo, hi, &pts, APPLY_OPTS)?;
    Ok(r.value)
}

/// [`apply_kernel`] at many points.
pub fn apply_kernel_many(k: &GreensKernel, g: &Source, xs: &[f64], exec: Exec) -> Result<Vec<C>> {
    par::map(exec, xs, |x| apply_kernel(k, g, *x)).into_iter().collect()
}

/// ⟨f|g⟩ = ∫ f g over the support of g.
pub fn pairing(f: &SolutionTrajectory, g: &Source) -> Result<C> {
    let (lo, hi) = g.support().ok_or_else(|| Error::InvalidArgument("source must have compact support".into()))?;
    let mut pts = f.mesh();
    pts.retain(|p| lo < *p && *p < hi);
    let r = integrate(|y| f.value(y).unwrap_or(C::new(f64::NAN, 0.0)) * g.eval(y), lo, hi, &pts, APPLY_OPTS)?;
    Ok(r.value)
}

/// Differences of Green's operators that reduce to finite-rank terms.
#[derive(Debug, Clone)]
pub enum DifferenceIdentity {
    /// G_{u,v} − G_→ = |u⟩⟨v|.
    TwoSidedForward,
    /// G_{u,v} − G_← = |v⟩⟨u|.
    TwoSidedBackward,
    /// G_→ − G_← = G_↔.
    ForwardBackward,
    /// G_{u,v} − G_{u₁,v₁} = |u⟩⟨v| − |u₁⟩⟨v₁|.
    TwoSidedPair { u1: SolutionTrajectory, v1: SolutionTrajectory },
}

/// Largest residual of the identity applied to g over the probe points.
pub fn difference_identity_residual(
    identity: &DifferenceIdentity,
    u: &SolutionTrajectory,
    v: &SolutionTrajectory,
    g: &Source,
    probes: &[f64],
) -> Result<C> {
    let two = build_kernel(KernelKind::TwoSided, u, v)?;
    let (nu, nv) = (two.u(), two.v());
    let mut worst = C::new(0.0, 0.0);
    let mut keep = |r: C| {
        if r.norm() > worst.norm() || r.is_nan() {
            worst = r;
        }
    };
    match identity {
        DifferenceIdentity::TwoSidedForward | DifferenceIdentity::TwoSidedBackward => {
            let backward = matches!(identity, DifferenceIdentity::TwoSidedBackward);
            let other = build_kernel(if backward { KernelKind::Backward } else { KernelKind::Forward }, u, v)?;
            let (ket, bra) = if backward { (nv, nu) } else { (nu, nv) };
            let c = pairing(bra, g)?;
            for &x in probes {
                keep(apply_kernel(&two, g, x)? - apply_kernel(&other, g, x)? - ket.value(x)? * c);
            }
        }
        DifferenceIdentity::ForwardBackward => {
            let f = build_kernel(KernelKind::Forward, u, v)?;
            let b = build_kernel(KernelKind::Backward, u, v)?;
            let bi = build_kernel(KernelKind::Bisolution, u, v)?;
            for &x in probes {
                keep(apply_kernel(&f, g, x)? - apply_kernel(&b, g, x)? - apply_kernel(&bi, g, x)?);
            }
        }
        DifferenceIdentity::TwoSidedPair { u1, v1 } => {
            let two1 = build_kernel(KernelKind::TwoSided, u1, v1)?;
            let c = pairing(two.v(), g)?;
            let c1 = pairing(two1.v(), g)?;
            for &x in probes {
                let lhs = apply_kernel(&two, g, x)? - apply_kernel(&two1, g, x)?;
                keep(lhs - two.u().value(x)? * c + two1.u().value(x)? * c1);
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct JumpRecord {
    /// G(x, x−0) − G(x, x+0).
    pub value_jump: C,
    /// ∂₂G(x, x−0) − ∂₂G(x, x+0).
    pub derivative_jump: C,
}

/// One-sided limits in y at y = x, from degree-5 polynomial extrapolation
/// of kernel samples on each side.
pub fn jump_diagnostics(k: &GreensKernel, x: f64) -> Result<JumpRecord> {
    let (lo, hi) = k.span();
    let room = (x - lo).min(hi - x);
    const N: usize = 6;
    let h = (room / (N as f64 + 1.0)).min(1e-3 * (1.0 + x.abs()));
    if !(room > 0.0) || h < 1e-6 * (hi - lo).min(1.0) {
        return Err(Error::InvalidArgument(format!("{x} is too close to the ends of the kernel span [{lo}, {hi}]")));
    }
    let side = |s: f64| -> Result<(C, C)> {
        let ys: Vec<f64> = (1..=N).map(|j| s * j as f64 * h).collect();
        let vals: Vec<C> = ys.iter().map(|t| k.eval(x, x + t)).collect::<Result<_>>()?;
        Ok(extrapolate(&ys, &vals))
    };
    let (l0, l1) = side(-1.0)?;
    let (r0, r1) = side(1.0)?;
    Ok(JumpRecord { value_jump: l0 - r0, derivative_jump: l1 - r1 })
}

/// Value and first derivative at 0 of the interpolating polynomial.
fn extrapolate(t: &[f64], f: &[C]) -> (C, C) {
    // Lagrange basis at 0: value weights ℓ_j(0) and slope weights ℓ_j′(0).
    let n = t.len();
    let (mut val, mut der) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
    for j in 0..n {
        let denom: f64 = (0..n).filter(|m| *m != j).map(|m| t[j] - t[m]).product();
        let l0: f64 = (0..n).filter(|m| *m != j).map(|m| -t[m]).product::<f64>() / denom;
        let mut l1 = 0.0;
        for i in (0..n).filter(|i| *i != j) {
            l1 += (0..n).filter(|m| *m != j && *m != i).map(|m| -t[m]).product::<f64>();
        }
        val += f[j] * l0;
        der += f[j] * (l1 / denom);
    }
    (val, der)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrapolation_is_exact_for_quintics() {
        let t: Vec<f64> = (1..=6).map(|j| 0.1 * j as f64).collect();
        let p = |s: f64| C::new(2.0 - 3.0 * s + s.powi(5), s * s);
        let f: Vec<C> = t.iter().map(|s| p(*s)).collect();
        let (v, d) = extrapolate(&t, &f);
        assert!((v - 2.0).norm() < 1e-12);
        assert!((d + 3.0).norm() < 1e-10);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(KernelKind::parse("at_d:0.5").unwrap(), KernelKind::AtD(0.5));
        assert!(KernelKind::parse("sideways").is_err());
    }
}
