//! Weyl disks and the limit point / limit circle trichotomy for Im V ≤ 0,
//! Im λ > 0 and a regular left endpoint.

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::boundary::{approach_from, dim_u_report, im_v_probes, tail_verdict, TailOptions, TailRecord, TailVerdict};
use crate::error::{Error, Result};
use crate::ivp::{solve_ivp, IvpOptions, SolutionTrajectory};
use crate::par::{self, Exec};
use crate::potential::{Endpoint, Potential};
use crate::quad::{gauss_legendre, merge_meshes};

/// Past this ‖u‖²_U the radius is numerically zero.
pub const NORM_CAP: f64 = 1e30;
/// Radii above this count as a positive limit.
pub const LC_RADIUS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeylDisk {
    pub d: f64,
    pub center: C,
    pub radius: f64,
    pub u_norm_sq: f64,
    pub lambda: C,
}

impl WeylDisk {
    /// Closed disk `self` inside the open disk `outer`, up to `slack`.
    pub fn nested_in(&self, outer: &WeylDisk, slack: f64) -> bool {
        (self.center - outer.center).norm() + self.radius < outer.radius + slack
    }
}

/// U-weighted Gram entries of u, v on ]a, d[.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeylGram {
    pub d: f64,
    pub uu: f64,
    /// ⟨u,v⟩_U = ∫ ū v U.
    pub uv: C,
    pub vv: f64,
}

impl WeylGram {
    pub fn disk(&self, lambda: C) -> Result<WeylDisk> {
        if !(self.uu > f64::MIN_POSITIVE) {
            return Err(Error::InvalidArgument(format!("‖u‖²_U = {:e} underflows", self.uu)));
        }
        let center = (C::new(0.0, 0.5) - self.uv) / self.uu;
        Ok(WeylDisk { d: self.d, center, radius: 0.5 / self.uu, u_norm_sq: self.uu, lambda })
    }

    /// Center and radius read off the quadratic |m|² − 2Re(m̄c) + ‖v‖²/‖u‖² = 0.
    pub fn quadratic_circle(&self) -> (C, f64) {
        let c = (C::new(0.0, 0.5) - self.uv) / self.uu;
        let r2 = ((C::new(0.0, 0.5) - self.uv).norm_sqr() - self.uu * self.vv) / (self.uu * self.uu);
        (c, r2.max(0.0).sqrt())
    }

    /// ‖mu+v‖²_U from the Gram entries.
    pub fn norm_of(&self, m: C) -> f64 {
        m.norm_sqr() * self.uu + 2.0 * (m.conj() * self.uv).re + self.vv
    }
}

fn check_pre(p: &Potential, lambda: C) -> Result<()> {
    if !(lambda.im > 0.0) {
        return Err(Error::InvalidArgument(format!("Im λ = {} must be positive", lambda.im)));
    }
    if !p.is_regular(Endpoint::A)? {
        return Err(Error::NotRegular);
    }
    for x in im_v_probes(p) {
        let v = p.eval(x);
        if v.im > 1e-14 * v.norm() {
            return Err(Error::NegativeWeight { x, weight: lambda.im - v.im });
        }
    }
    Ok(())
}

/// u with (u, u′)(a) = (1, 0) and v with (0, −1): real data at a, W(v,u) = 1.
pub fn weyl_basis(p: &Potential, lambda: C, d: f64, opts: &IvpOptions) -> Result<(SolutionTrajectory, SolutionTrajectory)> {
    let a = p.interval().end(Endpoint::A);
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let u = solve_ivp(p, lambda, a, one, zero, None, (a, d), opts)?;
    let v = solve_ivp(p, lambda, a, zero, -one, None, (a, d), opts)?;
    Ok((u, v))
}

/// Gram increments over [lo, hi]. Both solutions are smooth, so u's step
/// mesh serves for v as well.
fn shell_gram(p: &Potential, lambda: C, u: &SolutionTrajectory, v: &SolutionTrajectory, lo: f64, hi: f64) -> Result<(f64, C, f64)> {
    let mesh = merge_meshes(&u.mesh(), p.breakpoints_in(lo, hi), lo, hi);
    let (xs, ws) = gauss_legendre(8);
    let (mut uu, mut uv, mut vv) = (0.0, C::new(0.0, 0.0), 0.0);
    for pan in mesh.windows(2) {
        let (c, h) = (0.5 * (pan[0] + pan[1]), 0.5 * (pan[1] - pan[0]));
        for (xi, wi) in xs.iter().zip(&ws) {
            let y = c + h * xi;
            let w = lambda.im - p.eval(y).im;
            if w < -1e-12 * (1.0 + lambda.norm()) {
                return Err(Error::NegativeWeight { x: y, weight: w });
            }
            let (fu, fv) = (u.value(y)?, v.value(y)?);
            let k = wi * h * w;
            uu += k * fu.norm_sqr();
            uv += fu.conj() * fv * k;
            vv += k * fv.norm_sqr();
        }
    }
    Ok((uu, uv, vv))
}

pub fn weyl_gram(p: &Potential, lambda: C, d: f64) -> Result<WeylGram> {
    check_pre(p, lambda)?;
    let a = p.interval().end(Endpoint::A);
    if !p.interval().contains_open(d) {
        return Err(Error::InvalidArgument(format!("d = {d} is not inside the interval")));
    }
    let (u, v) = weyl_basis(p, lambda, d, &IvpOptions::default())?;
    if u.span().1 < d || v.span().1 < d {
        return Err(Error::OutOfSpan { x: d, lo: a, hi: u.span().1.min(v.span().1) });
    }
    let (uu, uv, vv) = shell_gram(p, lambda, &u, &v, a, d)?;
    Ok(WeylGram { d, uu, uv, vv })
}

pub fn weyl_disk(p: &Potential, lambda: C, d: f64) -> Result<WeylDisk> {
    weyl_gram(p, lambda, d)?.disk(lambda)
}

/// ∫ |f|² Im(λ−V) from the left end of f's span (or a, if later) to `up_to`.
pub fn weighted_norm(f: &SolutionTrajectory, p: &Potential, lambda: C, up_to: f64) -> Result<f64> {
    let lo = f.span().0.max(p.interval().end(Endpoint::A));
    if up_to > f.span().1 || up_to < lo {
        return Err(Error::OutOfSpan { x: up_to, lo, hi: f.span().1 });
    }
    let mesh = merge_meshes(&f.mesh(), p.breakpoints_in(lo, up_to), lo, up_to);
    let (xs, ws) = gauss_legendre(8);
    let mut bad = None;
    let mut s = 0.0;
    for pan in mesh.windows(2) {
        let (c, h) = (0.5 * (pan[0] + pan[1]), 0.5 * (pan[1] - pan[0]));
        for (xi, wi) in xs.iter().zip(&ws) {
            let y = c + h * xi;
            let w = lambda.im - p.eval(y).im;
            if w < -1e-12 * (1.0 + lambda.norm()) && bad.is_none() {
                bad = Some((y, w));
            }
            s += wi * h * w * f.value(y)?.norm_sqr();
        }
    }
    match bad {
        Some((x, weight)) => Err(Error::NegativeWeight { x, weight }),
        None => Ok(s),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrichotomyCase {
    #[serde(rename = "limit_point_one_L2")]
    LimitPointOneL2,
    #[serde(rename = "limit_point_all_L2")]
    LimitPointAllL2,
    #[serde(rename = "limit_circle")]
    LimitCircle,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrichotomyReport {
    pub case: TrichotomyCase,
    pub lambda: C,
    pub limit_radius_estimate: f64,
    /// Last center; the m-point in the limit point cases.
    pub m_point_estimate: Option<C>,
    pub disks: Vec<WeylDisk>,
    /// (d, ‖u‖²_U on ]a,d[, increment over the last shell).
    pub norm_table: Vec<(f64, f64, f64)>,
    pub norm_verdict: TailVerdict,
    #[serde(rename = "dim_Ub")]
    pub dim_ub: usize,
    pub evidence: Vec<TailRecord>,
    /// `overflow`: u or v hit the overflow cap before the trace ended.
    /// `norm_cap`: the trace stopped at ‖u‖²_U > 1e30.
    /// `overflow_truncation`: a verdict rests on fewer than five increments
    /// because of overflow or the cap.
    /// `dim_u_mismatch`: the L² count contradicts the geometric case.
    pub flags: Vec<String>,
}

pub fn trichotomy(p: &Potential, lambda: C) -> Result<TrichotomyReport> {
    trichotomy_with(p, lambda, &TailOptions::default(), Exec::Auto)
}

/// Independent λ traces, run concurrently under `Exec::Auto`.
pub fn trichotomy_many(p: &Potential, lambdas: &[C], opts: &TailOptions, exec: Exec) -> Vec<Result<TrichotomyReport>> {
    par::map(exec, lambdas, |l| trichotomy_with(p, *l, opts, Exec::Sequential))
}

pub fn trichotomy_with(p: &Potential, lambda: C, opts: &TailOptions, exec: Exec) -> Result<TrichotomyReport> {
    check_pre(p, lambda)?;
    let a = p.interval().end(Endpoint::A);
    let points = approach_from(p, a, Endpoint::B, lambda, opts);
    let far = *points.last().expect("start");
    let (basis, dim) = par::join(exec, || weyl_basis(p, lambda, far, &opts.ivp), || dim_u_report(p, Endpoint::B, lambda, opts, exec));
    let (u, v) = basis?;
    let reach = u.span().1.min(v.span().1);

    let mut flags = Vec::new();
    let mut disks: Vec<WeylDisk> = Vec::new();
    let mut table = vec![(a, 0.0, 0.0)];
    let (mut uu, mut uv, mut vv) = (0.0, C::new(0.0, 0.0), 0.0);
    let mut capped = false;
    for w in points.windows(2) {
        if w[1] > reach {
            flags.push("overflow".to_string());
            break;
        }
        let (du, duv, dv) = shell_gram(p, lambda, &u, &v, w[0], w[1])?;
        uu += du;
        uv += duv;
        vv += dv;
        if !uu.is_finite() {
            flags.push("overflow".to_string());
            break;
        }
        let disk = WeylGram { d: w[1], uu, uv, vv }.disk(lambda)?;
        if let Some(prev) = disks.last() {
            if !disk.nested_in(prev, 1e-9 * (prev.radius + prev.center.norm())) {
                return Err(Error::NestingLost { d: w[1] });
            }
        }
        disks.push(disk);
        table.push((w[1], uu, du));
        if uu > NORM_CAP {
            flags.push("norm_cap".to_string());
            capped = true;
            break;
        }
    }
    let last = *disks.last().ok_or_else(|| Error::Budget("no Weyl disk before overflow".into()))?;
    let truncated = capped || !flags.is_empty();
    let norm_verdict = if capped { TailVerdict::NotL2 } else { tail_verdict(&table, truncated) };

    // Spec rule: five radii agreeing to 1e-6 relative and above LC_RADIUS.
    let settled = disks.len() >= 5 && {
        let r: Vec<f64> = disks[disks.len() - 5..].iter().map(|d| d.radius).collect();
        r.windows(2).all(|p| (p[0] - p[1]).abs() < 1e-6 * p[0]) && r[4] > LC_RADIUS
    };
    let (limit_circle, radius) = if settled {
        (true, last.radius)
    } else if norm_verdict == TailVerdict::L2 {
        // Geometric tail of ‖u‖²_U: extrapolate the total.
        let inc: Vec<f64> = table.iter().map(|r| r.2).collect();
        let n = inc.len();
        let rho = (inc[n - 1] / inc[n - 5]).powf(0.25);
        let total = uu + if rho < 1.0 { inc[n - 1] * rho / (1.0 - rho) } else { 0.0 };
        let r = 0.5 / total;
        (r > LC_RADIUS, r)
    } else if norm_verdict == TailVerdict::NotL2 {
        (false, last.radius)
    } else {
        return Err(Error::TailIndeterminate { table: table.iter().map(|r| (r.0, r.1)).collect() });
    };

    let dim = dim?;
    // Truncation dominates when a verdict rests on fewer than five increments.
    let short = |n: usize| n < 6;
    if (truncated && short(table.len())) || dim.evidence.iter().any(|r| r.truncated_at.is_some() && short(r.table.len())) {
        flags.push("overflow_truncation".to_string());
    }
    let case = if limit_circle {
        if dim.dim != 2 {
            flags.push("dim_u_mismatch".to_string());
        }
        TrichotomyCase::LimitCircle
    } else {
        match dim.dim {
            2 => TrichotomyCase::LimitPointAllL2,
            1 => TrichotomyCase::LimitPointOneL2,
            _ => {
                // The m-point solution has finite U-norm, so some solution is L².
                flags.push("dim_u_mismatch".to_string());
                TrichotomyCase::LimitPointOneL2
            }
        }
    };
    Ok(TrichotomyReport {
        case,
        lambda,
        limit_radius_estimate: radius,
        m_point_estimate: (!limit_circle).then_some(last.center),
        disks,
        norm_table: table,
        norm_verdict,
        dim_ub: dim.dim,
        evidence: dim.evidence,
        flags,
    })
}

/// Disk trace as CSV rows `d,re_c,im_c,r`.
pub fn disks_csv(disks: &[WeylDisk]) -> String {
    let mut s = String::from("d,re_c,im_c,r\n");
    for d in disks {
        s.push_str(&format!("{:e},{:e},{:e},{:e}\n", d.d, d.center.re, d.center.im, d.radius));
    }
    s
}
