//! Zeros of an analytic function in a rectangle: argument principle,
//! bisection to isolation, Newton refinement.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// [re0, re1] × [im0, im1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Region {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Result<Region> {
        let ok = [re0, re1, im0, im1].iter().all(|v| v.is_finite()) && re0 < re1 && im0 < im1;
        if !ok {
            return Err(Error::InvalidArgument(format!("degenerate region [{re0},{re1}]×[{im0},{im1}]")));
        }
        Ok(Region { re0, re1, im0, im1 })
    }

    pub fn contains(&self, z: C) -> bool {
        z.re >= self.re0 && z.re <= self.re1 && z.im >= self.im0 && z.im <= self.im1
    }

    pub fn center(&self) -> C {
        C::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    fn diameter(&self) -> f64 {
        (self.re1 - self.re0).hypot(self.im1 - self.im0)
    }

    fn corners(&self) -> [C; 4] {
        [C::new(self.re0, self.im0), C::new(self.re1, self.im0), C::new(self.re1, self.im1), C::new(self.re0, self.im1)]
    }

    /// Halves along the longer side, the cut moved by `shift` of the side.
    fn split(&self, shift: f64) -> (Region, Region) {
        if self.re1 - self.re0 >= self.im1 - self.im0 {
            let m = self.re0 + (0.5 + shift) * (self.re1 - self.re0);
            (Region { re1: m, ..*self }, Region { re0: m, ..*self })
        } else {
            let m = self.im0 + (0.5 + shift) * (self.im1 - self.im0);
            (Region { im1: m, ..*self }, Region { im0: m, ..*self })
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Function evaluations, including Newton steps.
    pub max_evals: usize,
    pub max_roots: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_evals: 40_000, max_roots: 64 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Root {
    pub lambda: C,
    /// |f(λ)| relative to the largest |f| seen on the outer contour.
    pub residual: f64,
    pub multiplicity: usize,
}

/// Samples per edge before adaptive refinement.
const BASE: usize = 16;
/// Largest accepted phase change between neighbouring samples.
const MAX_STEP: f64 = 0.5;

struct Search<'a, F> {
    f: &'a F,
    exec: Exec,
    cache: Mutex<HashMap<(u64, u64), C>>,
    evals: AtomicUsize,
    max_evals: usize,
}

impl<'a, F: Fn(C) -> Result<C> + Sync> Search<'a, F> {
    fn eval(&self, z: C) -> Result<C> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(w) = self.cache.lock().expect("cache").get(&key) {
            return Ok(*w);
        }
        if self.evals.fetch_add(1, Ordering::Relaxed) >= self.max_evals {
            return Err(Error::Budget(format!("more than {} evaluations", self.max_evals)));
        }
        let w = (self.f)(z)?;
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::Budget(format!("non-finite value at λ = {z}")));
        }
        self.cache.lock().expect("cache").insert(key, w);
        Ok(w)
    }

    /// Phase change along z0 → z1, bisecting until every step is small.
    fn edge_phase(&self, z0: C, z1: C, w0: C, w1: C, depth: usize) -> Result<f64> {
        let d = (w1 / w0).arg();
        if d.abs() <= MAX_STEP {
            return Ok(d);
        }
        if depth > 40 {
            return Err(Error::ContourNearRoot);
        }
        let zm = 0.5 * (z0 + z1);
        let wm = self.eval(zm)?;
        Ok(self.edge_phase(z0, zm, w0, wm, depth + 1)? + self.edge_phase(zm, z1, wm, w1, depth + 1)?)
    }

    /// Winding number of f around `r`, with `base` initial samples per edge,
    /// and the largest |f| seen.
    fn winding(&self, r: &Region, base: usize) -> Result<(i64, f64)> {
        let c = r.corners();
        let mut pts = Vec::with_capacity(4 * base + 1);
        for k in 0..4 {
            let (z0, z1) = (c[k], c[(k + 1) % 4]);
            for j in 0..base {
                pts.push(z0 + (z1 - z0) * (j as f64 / base as f64));
            }
        }
        let vals: Vec<C> = par::map(self.exec, &pts, |z| self.eval(*z)).into_iter().collect::<Result<_>>()?;
        let scale = vals.iter().map(|w| w.norm()).fold(0.0, f64::max);
        let n = pts.len();
        // |f| can span many decades along the contour, so compare with neighbours.
        for i in 0..n {
            let near = vals[(i + n - 1) % n].norm().max(vals[(i + 1) % n].norm());
            if vals[i].norm() <= 1e-12 * near {
                return Err(Error::ContourNearRoot);
            }
        }
        let idx: Vec<usize> = (0..n).collect();
        let phases: Vec<f64> =
            par::map(self.exec, &idx, |i| self.edge_phase(pts[*i], pts[(*i + 1) % n], vals[*i], vals[(*i + 1) % n], 0)).into_iter().collect::<Result<_>>()?;
        let total: f64 = phases.iter().sum();
        let w = total / (2.0 * std::f64::consts::PI);
        if (w - w.round()).abs() > 0.1 {
            return Err(Error::ContourNearRoot);
        }
        Ok((w.round() as i64, scale))
    }

    /// Winding number, retried with a doubled base until two counts agree.
    fn stable_winding(&self, r: &Region) -> Result<(i64, f64)> {
        let (n1, s1) = self.winding(r, BASE)?;
        let (n2, s2) = self.winding(r, 2 * BASE)?;
        if n1 == n2 {
            return Ok((n1, s1.max(s2)));
        }
        let (n3, s3) = self.winding(r, 4 * BASE)?;
        if n3 == n2 {
            Ok((n3, s3))
        } else {
            Err(Error::ContourNearRoot)
        }
    }
}

/// Zeros of `f` inside `region`. `df` returns (f, f′) for Newton steps.
pub fn find_roots<F, D>(f: &F, df: &D, region: Region, budget: SearchBudget, exec: Exec) -> Result<Vec<Root>>
where
    F: Fn(C) -> Result<C> + Sync,
    D: Fn(C) -> Result<(C, C)> + Sync,
{
    let s = Search { f, exec, cache: Mutex::new(HashMap::new()), evals: AtomicUsize::new(0), max_evals: budget.max_evals };
    let (total, scale) = s.stable_winding(&region)?;
    if total < 0 {
        return Err(Error::InvalidArgument(format!("negative winding {total}: function has poles in the region")));
    }
    let mut roots = Vec::new();
    let mut stack = vec![(region, total)];
    // Clusters this small are reported as one root with multiplicity.
    let min_size = 1e-6 * (1.0 + region.diameter());
    while let Some((r, n)) = stack.pop() {
        if n == 0 {
            continue;
        }
        if roots.len() >= budget.max_roots {
            return Err(Error::Budget(format!("more than {} roots", budget.max_roots)));
        }
        if n == 1 || r.diameter() < min_size {
            if let Some(z) = newton(df, r.center(), n as usize, &r, &s)? {
                roots.push(Root { lambda: z, residual: s.eval(z).or_else(|_| f(z))?.norm() / scale, multiplicity: n as usize });
                continue;
            }
            if r.diameter() < min_size {
                return Err(Error::Budget(format!("Newton failed in a cell of size {:e}", r.diameter())));
            }
        }
        // Split, nudging the cut off any root it passes through.
        let mut done = false;
        for shift in [0.0, 0.0371, -0.0613, 0.0897] {
            let (r1, r2) = r.split(shift);
            match s.stable_winding(&r1) {
                Ok((n1, _)) if n1 >= 0 && n1 <= n => {
                    stack.push((r1, n1));
                    stack.push((r2, n - n1));
                    done = true;
                    break;
                }
                Ok(_) | Err(Error::ContourNearRoot) => continue,
                Err(e) => return Err(e),
            }
        }
        if !done {
            return Err(Error::ContourNearRoot);
        }
    }
    // An even-order root on a cut is invisible to the phase test, so both
    // halves may find it.
    let mut merged: Vec<Root> = Vec::with_capacity(roots.len());
    for r in roots {
        match merged.iter_mut().find(|q| (q.lambda - r.lambda).norm() < min_size) {
            Some(q) => {
                q.multiplicity += r.multiplicity;
                if r.residual < q.residual {
                    (q.lambda, q.residual) = (r.lambda, r.residual);
                }
            }
            None => merged.push(r),
        }
    }
    merged.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
    Ok(merged)
}

/// Newton (multiplicity-corrected) from `z0`; `None` if it leaves `r`
/// or fails to settle.
fn newton<F, D>(df: &D, z0: C, m: usize, r: &Region, s: &Search<'_, F>) -> Result<Option<C>>
where
    F: Fn(C) -> Result<C> + Sync,
    D: Fn(C) -> Result<(C, C)> + Sync,
{
    let pad = 1e-6 * r.diameter();
    let grown = Region { re0: r.re0 - pad, re1: r.re1 + pad, im0: r.im0 - pad, im1: r.im1 + pad };
    let mut z = z0;
    let mut prev = f64::INFINITY;
    for _ in 0..60 {
        if s.evals.fetch_add(1, Ordering::Relaxed) >= s.max_evals {
            return Err(Error::Budget(format!("more than {} evaluations", s.max_evals)));
        }
        let (w, dw) = df(z)?;
        if w == C::new(0.0, 0.0) {
            return Ok(Some(z));
        }
        if dw.norm() == 0.0 || !dw.re.is_finite() {
            return Ok(None);
        }
        let step = w / dw * m as f64;
        z -= step;
        if !grown.contains(z) {
            return Ok(None);
        }
        let size = step.norm();
        if size <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            return Ok(Some(z));
        }
        // Stalled at the noise floor of f.
        if size <= 1e-10 * (1.0 + z.norm()) && size >= 0.9 * prev {
            return Ok(Some(z));
        }
        prev = size;
    }
    Ok(None)
}
