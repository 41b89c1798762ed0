//! Square-integrability near an endpoint by truncated tail integrals.

use num_complex::Complex64 as C;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivp::{solve_ivp, IvpOptions, SolutionTrajectory};
use crate::par::{self, Exec};
use crate::potential::{Endpoint, Potential};
use crate::quad::{merge_meshes, mesh_integrate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailVerdict {
    L2,
    NotL2,
    Indeterminate,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailRecord {
    pub label: String,
    /// (t_k, ∫|f|² between the first point and t_k, the last shell's share).
    pub table: Vec<(f64, f64, f64)>,
    pub verdict: TailVerdict,
    /// Overflow stop point, if the trajectory was cut short.
    pub truncated_at: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct TailOptions {
    /// Limit on ∫√|V−λ| along the way to an infinite endpoint; bounds the
    /// work spent on fast oscillations.
    pub phase_budget: f64,
    /// Largest distance from the anchor toward an infinite endpoint.
    pub max_reach: f64,
    pub ivp: IvpOptions,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions { phase_budget: 3e4, max_reach: 1e6, ivp: IvpOptions::default() }
    }
}

/// Truncation points from the anchor toward `e`: halving distances for a
/// finite endpoint, anchor ± (√2^k − 1) for an infinite one.
pub fn tail_points(p: &Potential, e: Endpoint, lambda: C, opts: &TailOptions) -> Result<Vec<f64>> {
    Ok(approach_from(p, p.interval().anchor(), e, lambda, opts))
}

/// Geometric points from `start` toward endpoint `e`, `start` included.
pub fn approach_from(p: &Potential, start: f64, e: Endpoint, lambda: C, opts: &TailOptions) -> Vec<f64> {
    let x_e = p.interval().end(e);
    let mut pts = vec![start];
    if x_e.is_finite() {
        for k in 1..48 {
            let x = x_e + (start - x_e) * 0.5f64.powi(k);
            if (x - x_e).abs() < 1e4 * f64::EPSILON * x_e.abs() || x == x_e {
                break;
            }
            pts.push(x);
        }
        return pts;
    }
    let sgn = if e == Endpoint::B { 1.0 } else { -1.0 };
    let mut phase = 0.0;
    for k in 1..200 {
        let dist = std::f64::consts::SQRT_2.powi(k) - 1.0;
        if dist > opts.max_reach {
            break;
        }
        let x = start + sgn * dist;
        let prev = *pts.last().expect("start");
        let (lo, hi) = if sgn > 0.0 { (prev, x) } else { (x, prev) };
        // A rough estimate is enough for a budget: panels of width ≤ 1, capped.
        let n = ((hi - lo).ceil() as usize).clamp(1, 4096);
        let grid: Vec<f64> = (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect();
        let br = merge_meshes(&grid, p.breakpoints_in(lo, hi), lo, hi);
        phase += mesh_integrate(|y| C::new((p.eval(y) - lambda).norm().sqrt(), 0.0), &br).re;
        if phase > opts.phase_budget && pts.len() >= 8 {
            break;
        }
        pts.push(x);
    }
    pts
}

/// Cumulative ∫|f|² from the first point of `points` inside f's span.
pub fn partial_integrals(f: &SolutionTrajectory, points: &[f64]) -> Vec<(f64, f64, f64)> {
    let (lo, hi) = f.span();
    let inside: Vec<f64> = points.iter().copied().filter(|x| *x >= lo && *x <= hi).collect();
    let mesh = f.mesh();
    let mut out = Vec::with_capacity(inside.len());
    let mut acc = 0.0;
    for (i, x) in inside.iter().enumerate() {
        let mut inc = 0.0;
        if i > 0 {
            let (s, t) = if inside[i - 1] < *x { (inside[i - 1], *x) } else { (*x, inside[i - 1]) };
            let mut br: Vec<f64> = mesh.iter().copied().filter(|m| *m > s && *m < t).collect();
            br.insert(0, s);
            br.push(t);
            inc = mesh_integrate(|y| C::new(f.value(y).map_or(f64::NAN, |v| v.norm_sqr()), 0.0), &br).re;
            acc += inc;
        }
        out.push((*x, acc, inc));
    }
    out
}

/// L² if the last increments shrink by ≤ 0.9 per step on average; not L² if the
/// partial integral grew ≥ 10× or the increments stopped shrinking.
pub fn tail_verdict(table: &[(f64, f64, f64)], truncated: bool) -> TailVerdict {
    let need = if truncated { 3 } else { 5 };
    let inc: Vec<f64> = table.iter().skip(1).map(|r| r.2).collect();
    if inc.iter().any(|d| !d.is_finite()) {
        return TailVerdict::NotL2;
    }
    if inc.len() < need {
        return if truncated { TailVerdict::NotL2 } else { TailVerdict::Indeterminate };
    }
    let last = &inc[inc.len() - need..];
    let total = table[table.len() - 1].1;
    // Five shrinking increments whose geometric-mean ratio is at most 0.9.
    let shrinking = last.windows(2).all(|w| w[1] <= w[0]) && last[need - 1] <= 0.9f64.powi(need as i32 - 1) * last[0];
    if last.iter().all(|d| *d <= 1e-300) || shrinking {
        return TailVerdict::L2;
    }
    let before = table[table.len() - 1 - need].1;
    if (before > 0.0 && total >= 10.0 * before) || last.windows(2).all(|w| w[1] >= w[0]) {
        return TailVerdict::NotL2;
    }
    TailVerdict::Indeterminate
}

fn record(label: &str, f: &SolutionTrajectory, points: &[f64], e: Endpoint) -> TailRecord {
    let table = partial_integrals(f, points);
    let trunc = f.truncation();
    let truncated_at = if e == Endpoint::A { trunc.0 } else { trunc.1 };
    TailRecord { label: label.to_string(), verdict: tail_verdict(&table, truncated_at.is_some()), table, truncated_at }
}

fn span_to(points: &[f64], anchor: f64) -> (f64, f64) {
    let far = *points.last().expect("nonempty");
    if far < anchor {
        (far, anchor)
    } else {
        (anchor, far)
    }
}

/// Solution decaying toward `e`, started at `t` with WKB data
/// f′/f = ∓√(V(t)−λ) and integrated back toward the anchor.
pub fn decaying_candidate(p: &Potential, e: Endpoint, lambda: C, t: f64, opts: &IvpOptions) -> Result<SolutionTrajectory> {
    let anchor = p.interval().anchor();
    let k = (p.eval(t) - lambda).sqrt();
    let k = if k.re < 0.0 { -k } else { k };
    let slope = if e == Endpoint::B { -k } else { k };
    let span = if t > anchor { (anchor, t) } else { (t, anchor) };
    solve_ivp(p, lambda, t, C::new(1.0, 0.0), slope, None, span, opts)
}

#[derive(Debug, Clone, Serialize)]
pub struct DimReport {
    pub dim: usize,
    pub lambda: C,
    pub evidence: Vec<TailRecord>,
    /// Set when the endpoint is semiregular and the answer needs no
    /// integration.
    pub semiregular: bool,
}

/// Dimension of the space of solutions of Lf = λf square integrable near `e`.
pub fn dim_u(p: &Potential, e: Endpoint, lambda: C) -> Result<usize> {
    Ok(dim_u_report(p, e, lambda, &TailOptions::default(), Exec::Auto)?.dim)
}

pub fn dim_u_report(p: &Potential, e: Endpoint, lambda: C, opts: &TailOptions, exec: Exec) -> Result<DimReport> {
    if p.is_semiregular(e)? {
        return Ok(DimReport { dim: 2, lambda, evidence: Vec::new(), semiregular: true });
    }
    let points = tail_points(p, e, lambda, opts)?;
    let anchor = p.interval().anchor();
    let span = span_to(&points, anchor);
    let data = [(C::new(1.0, 0.0), C::new(0.0, 0.0)), (C::new(0.0, 0.0), C::new(1.0, 0.0))];
    let basis: Vec<SolutionTrajectory> =
        par::map(exec, &data, |(p0, p1)| solve_ivp(p, lambda, anchor, *p0, *p1, None, span, &opts.ivp)).into_iter().collect::<Result<_>>()?;
    let mut evidence: Vec<TailRecord> = basis.iter().enumerate().map(|(i, f)| record(&format!("basis_{}", i + 1), f, &points, e)).collect();
    if evidence.iter().any(|r| r.verdict == TailVerdict::Indeterminate) {
        return Err(indeterminate(&evidence));
    }
    let n_l2 = evidence.iter().filter(|r| r.verdict == TailVerdict::L2).count();
    if n_l2 > 0 {
        return Ok(DimReport { dim: n_l2, lambda, evidence, semiregular: false });
    }
    // Both basis solutions carry the growing mode; test the decaying one,
    // started where the growing mode has gained at most GROWTH so the
    // backward run stays below the overflow cap.
    const GROWTH: f64 = 1e60;
    let near: Vec<f64> = points
        .iter()
        .copied()
        .take_while(|x| basis.iter().all(|f| f.value(*x).is_ok_and(|v| v.norm() <= GROWTH)))
        .collect();
    if near.len() < 4 {
        return Err(indeterminate(&evidence));
    }
    let t = *near.last().expect("nonempty");
    let dec = decaying_candidate(p, e, lambda, t, &opts.ivp)?;
    let mut rec = record("decaying", &dec, &near, e);
    if rec.verdict == TailVerdict::Indeterminate {
        // Too few points before t for the 5-step rule; the shorter rule
        // applies because t is a forced cutoff.
        rec.verdict = tail_verdict(&rec.table, true);
    }
    let verdict = rec.verdict;
    evidence.push(rec);
    match verdict {
        TailVerdict::L2 => Ok(DimReport { dim: 1, lambda, evidence, semiregular: false }),
        TailVerdict::NotL2 => Ok(DimReport { dim: 0, lambda, evidence, semiregular: false }),
        TailVerdict::Indeterminate => Err(indeterminate(&evidence)),
    }
}

fn indeterminate(evidence: &[TailRecord]) -> Error {
    let rec = evidence.iter().find(|r| r.verdict == TailVerdict::Indeterminate).unwrap_or(&evidence[0]);
    let table = rec.table.iter().map(|r| (r.0, r.1)).collect();
    Error::TailIndeterminate { table }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        let table = |cum: &dyn Fn(i32) -> f64| -> Vec<(f64, f64, f64)> {
            (0..8).map(|k| (k as f64, cum(k), if k == 0 { 0.0 } else { cum(k) - cum(k - 1) })).collect()
        };
        let geo = table(&|k| 1.0 - 0.5f64.powi(k));
        assert_eq!(tail_verdict(&geo, false), TailVerdict::L2);
        assert_eq!(tail_verdict(&table(&|k| 2f64.powi(k) - 1.0), false), TailVerdict::NotL2);
        assert_eq!(tail_verdict(&table(&|k| k as f64), false), TailVerdict::NotL2);
        let wobble: Vec<(f64, f64, f64)> = [0.0, 1.0, 1.5, 2.2, 2.5, 3.1, 3.3].windows(2).enumerate().map(|(k, w)| (k as f64, w[1], w[1] - w[0])).collect();
        assert_eq!(tail_verdict(&wobble, false), TailVerdict::Indeterminate);
        assert_eq!(tail_verdict(&geo[..3], false), TailVerdict::Indeterminate);
    }
}
