//! Second-order finite differences for −f″ + Vf on a uniform grid, used as
//! an independent check on the shooting results.

use num_complex::Complex64 as C;
use rand::Rng;
use serde::Serialize;

use super::{EndCondition, Realization};
use crate::error::{Error, Result};
use crate::potential::{Endpoint, Potential};

/// Tridiagonal M acting on the unknown node values. Robin ends use a ghost
/// node; Dirichlet ends drop the boundary node.
#[derive(Debug, Clone, Serialize)]
pub struct FdMatrix {
    pub n: usize,
    pub h: f64,
    pub window: (f64, f64),
    /// Grid points carrying unknowns.
    pub nodes: Vec<f64>,
    pub diag: Vec<C>,
    /// lower[k] = M[k+1][k], upper[k] = M[k][k+1].
    pub lower: Vec<C>,
    pub upper: Vec<C>,
    /// Trapezoid weights (÷h) making W·M complex symmetric.
    pub weights: Vec<f64>,
    /// `dirichlet_proxy_a` / `dirichlet_proxy_b`: a decay end was replaced by
    /// f = 0 at the cutoff.
    pub flags: Vec<String>,
}

/// Boundary row data: `None` for Dirichlet, `Some(σ)` for f′ = σf.
fn robin(alpha0: C, alpha1: C) -> Option<C> {
    if alpha0.norm() <= 1e-300 {
        None
    } else {
        Some(alpha1 / alpha0)
    }
}

pub fn fd_oracle_build(r: &Realization, n: usize) -> Result<FdMatrix> {
    let mut flags = Vec::new();
    let mut sides = [None, None];
    for e in [Endpoint::A, Endpoint::B] {
        sides[e as usize] = match r.end(e) {
            EndCondition::Regular { alpha0, alpha1 } => robin(*alpha0, *alpha1),
            EndCondition::Decay { .. } => {
                flags.push(format!("dirichlet_proxy_{}", if e == Endpoint::A { "a" } else { "b" }));
                None
            }
            EndCondition::Functional(_) => return Err(Error::Unsupported("finite differences need regular vectors".into())),
        };
    }
    let mut m = fd_build(&r.potential, r.window(), n, sides[0], sides[1])?;
    m.flags = flags;
    Ok(m)
}

/// Matrix on `window` with f′ = σf (`Some`) or f = 0 (`None`) at each end.
pub fn fd_build(p: &Potential, window: (f64, f64), n: usize, sigma_a: Option<C>, sigma_b: Option<C>) -> Result<FdMatrix> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!("grid size {n} < 8")));
    }
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidArgument("finite differences need a finite window".into()));
    }
    let h = (b - a) / n as f64;
    let lo = if sigma_a.is_some() { 0 } else { 1 };
    let hi = if sigma_b.is_some() { n } else { n - 1 };
    let nodes: Vec<f64> = (lo..=hi).map(|j| if j == n { b } else { a + j as f64 * h }).collect();
    let m = nodes.len();
    let h2 = h * h;
    let interior = |x: f64, k: usize| -> f64 { if k == 0 { x + 0.5 * h } else { x - 0.5 * h } };
    let mut diag = Vec::with_capacity(m);
    for (k, x) in nodes.iter().enumerate() {
        // Boundary nodes take V from the inner side.
        let v = if *x == a || *x == b { p.eval_sel(*x, interior(*x, if *x == a { 0 } else { 1 })) } else { p.eval(*x) };
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidArgument(format!("V is not finite at grid node {x}")));
        }
        let mut d = C::new(2.0 / h2, 0.0) + v;
        if k == 0 && sigma_a.is_some() {
            d += 2.0 * sigma_a.unwrap_or_default() / h;
        }
        if k == m - 1 && sigma_b.is_some() {
            d -= 2.0 * sigma_b.unwrap_or_default() / h;
        }
        diag.push(d);
    }
    let mut lower = vec![C::new(-1.0 / h2, 0.0); m - 1];
    let mut upper = vec![C::new(-1.0 / h2, 0.0); m - 1];
    // Ghost nodes double the inward coupling of a Robin row.
    if sigma_a.is_some() {
        upper[0] *= 2.0;
    }
    if sigma_b.is_some() {
        lower[m - 2] *= 2.0;
    }
    let mut weights = vec![1.0; m];
    if sigma_a.is_some() {
        weights[0] = 0.5;
    }
    if sigma_b.is_some() {
        weights[m - 1] = 0.5;
    }
    Ok(FdMatrix { n, h, window, nodes, diag, lower, upper, weights, flags: Vec::new() })
}

impl FdMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, f: &[C]) -> Vec<C> {
        let m = self.dim();
        (0..m)
            .map(|k| {
                let mut s = self.diag[k] * f[k];
                if k > 0 {
                    s += self.lower[k - 1] * f[k - 1];
                }
                if k + 1 < m {
                    s += self.upper[k] * f[k + 1];
                }
                s
            })
            .collect()
    }

    /// W·M as (diag, off-diagonal); complex symmetric by construction.
    pub fn weighted(&self) -> (Vec<C>, Vec<C>, Vec<C>) {
        let m = self.dim();
        let d = (0..m).map(|k| self.diag[k] * self.weights[k]).collect();
        let lo = (0..m - 1).map(|k| self.lower[k] * self.weights[k + 1]).collect();
        let up = (0..m - 1).map(|k| self.upper[k] * self.weights[k]).collect();
        (d, lo, up)
    }

    /// log-derivatives p′/p and p″/p of det(M − λ) by the continuant
    /// recurrence, rescaled each step.
    fn log_derivatives(&self, lambda: C) -> (C, C) {
        let zero = C::new(0.0, 0.0);
        let one = C::new(1.0, 0.0);
        // (p, p′, p″) for k−1 and k−2.
        let (mut p1, mut d1, mut s1) = (one, zero, zero);
        let (mut p2, mut d2, mut s2) = (zero, zero, zero);
        for k in 0..self.dim() {
            let a = self.diag[k] - lambda;
            let c = if k > 0 { self.lower[k - 1] * self.upper[k - 1] } else { zero };
            let p = a * p1 - c * p2;
            let d = -p1 + a * d1 - c * d2;
            let s = -2.0 * d1 + a * s1 - c * s2;
            let norm = p.norm().max(d.norm()).max(s.norm()).max(1e-300);
            (p2, d2, s2) = (p1 / norm, d1 / norm, s1 / norm);
            (p1, d1, s1) = (p / norm, d / norm, s / norm);
        }
        (d1 / p1, s1 / p1)
    }

    /// `count` eigenvalues nearest `target` by Laguerre iteration with
    /// implicit deflation, sorted by distance to `target`.
    pub fn eigenvalues_near(&self, target: C, count: usize) -> Result<Vec<C>> {
        let n = self.dim() as f64;
        let want = (count + 3).min(self.dim());
        let mut found: Vec<C> = Vec::with_capacity(want);
        for _ in 0..want {
            let mut z = target + C::new(1e-3, 1e-3) * (1.0 + target.norm());
            let mut ok = false;
            let mut last_step = f64::INFINITY;
            for _ in 0..200 {
                let (g0, s0) = self.log_derivatives(z);
                // G = p′/p and H = G² − p″/p, minus the found roots' terms.
                let g = g0 - found.iter().map(|r| (z - r).inv()).sum::<C>();
                let h_def = g0 * g0 - s0 - found.iter().map(|r| (z - r).inv().powi(2)).sum::<C>();
                let nn = n - found.len() as f64;
                let root = ((nn - 1.0) * (nn * h_def - g * g)).sqrt();
                let den = if (g + root).norm() >= (g - root).norm() { g + root } else { g - root };
                if den.norm() == 0.0 {
                    z += C::new(1e-6, 1e-6) * (1.0 + z.norm());
                    continue;
                }
                let step = nn / den;
                z -= step;
                // Real spectra drive Im z into subnormals, which are slow.
                if z.im.abs() < 1e-200 {
                    z.im = 0.0;
                }
                last_step = step.norm();
                if last_step <= 1e-14 * (1.0 + z.norm()) {
                    ok = true;
                    break;
                }
            }
            // Rounding in the continuant can stall the last digits.
            if !ok && last_step > 1e-9 * (1.0 + z.norm()) {
                return Err(Error::Budget("Laguerre iteration did not converge".into()));
            }
            found.push(z);
        }
        found.sort_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()));
        found.truncate(count);
        Ok(found)
    }

    /// det(h²(M − λ)) by the continuant recurrence.
    pub fn characteristic(&self, lambda: C) -> C {
        let h2 = self.h * self.h;
        let (mut p1, mut p2) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
        for k in 0..self.dim() {
            let c = if k > 0 { self.lower[k - 1] * self.upper[k - 1] * h2 * h2 } else { C::new(0.0, 0.0) };
            let p = (self.diag[k] - lambda) * h2 * p1 - c * p2;
            (p2, p1) = (p1, p);
        }
        p1
    }

    /// Solves (M − λ)f = g by the Thomas algorithm.
    pub fn solve_shifted(&self, lambda: C, g: &[C]) -> Result<Vec<C>> {
        let m = self.dim();
        if g.len() != m {
            return Err(Error::InvalidArgument(format!("right side has {} entries, expected {m}", g.len())));
        }
        let mut c = vec![C::new(0.0, 0.0); m];
        let mut d = vec![C::new(0.0, 0.0); m];
        let mut beta = self.diag[0] - lambda;
        if beta.norm() == 0.0 {
            return Err(Error::NearEigenvalue { wronskian: 0.0 });
        }
        d[0] = g[0] / beta;
        for k in 1..m {
            c[k - 1] = self.upper[k - 1] / beta;
            beta = self.diag[k] - lambda - self.lower[k - 1] * c[k - 1];
            if beta.norm() == 0.0 {
                return Err(Error::NearEigenvalue { wronskian: 0.0 });
            }
            d[k] = (g[k] - self.lower[k - 1] * d[k - 1]) / beta;
        }
        for k in (0..m - 1).rev() {
            let next = d[k + 1];
            d[k] -= c[k] * next;
        }
        Ok(d)
    }

    /// Rayleigh quotients (f|Mf)/(f|f) in the trapezoid inner product for
    /// random complex f.
    pub fn numerical_range<R: Rng>(&self, samples: usize, rng: &mut R) -> Vec<C> {
        let (d, lo, up) = self.weighted();
        let m = self.dim();
        (0..samples)
            .map(|_| {
                let f: Vec<C> = (0..m).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                let mut num = C::new(0.0, 0.0);
                let mut den = 0.0;
                for k in 0..m {
                    let mut sf = d[k] * f[k];
                    if k > 0 {
                        sf += lo[k - 1] * f[k - 1];
                    }
                    if k + 1 < m {
                        sf += up[k] * f[k + 1];
                    }
                    num += f[k].conj() * sf;
                    den += self.weights[k] * f[k].norm_sqr();
                }
                num / den
            })
            .collect()
    }
}

/// Eigenvalues nearest `target` on grids `ns` (each twice the previous),
/// extrapolated in h² and then h⁴.
pub fn fd_richardson(r: &Realization, ns: &[usize], target: C, count: usize) -> Result<Vec<C>> {
    if ns.len() < 2 || ns.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidArgument("Richardson needs grid sizes doubling each time".into()));
    }
    let mut levels: Vec<Vec<C>> = Vec::new();
    for n in ns {
        let m = fd_oracle_build(r, *n)?;
        let ev = m.eigenvalues_near(target, count + 2)?;
        levels.push(ev);
    }
    // Match each coarse eigenvalue with its nearest counterpart on finer grids.
    let mut out = Vec::with_capacity(count);
    for k in 0..count.min(levels[0].len()) {
        let mut seq = vec![levels[0][k]];
        for lv in &levels[1..] {
            let prev = *seq.last().expect("nonempty");
            let best = lv.iter().copied().min_by(|a, b| (a - prev).norm().total_cmp(&(b - prev).norm())).expect("nonempty");
            seq.push(best);
        }
        let mut order = 2;
        while seq.len() > 1 {
            let f = 2f64.powi(order);
            seq = seq.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
            order += 2;
        }
        out.push(seq[0]);
    }
    out.sort_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()));
    Ok(out)
}

/// det of the finite-difference Cauchy problem at a (f(a) = f′(a) = 0),
/// normalized by h^{2(n−1)}: unknowns f₂..f_n, equations at nodes 1..n−1.
/// Gaussian elimination with partial pivoting on the band.
pub fn fd_cauchy_determinant(p: &Potential, window: (f64, f64), n: usize, lambda: C) -> Result<C> {
    if n < 8 {
        return Err(Error::InvalidArgument(format!("grid size {n} < 8")));
    }
    let (a, b) = window;
    let h = (b - a) / n as f64;
    let m = n - 1;
    // Row r (node j = r+1) couples f_{j−1}, f_j, f_{j+1} = columns r−2, r−1, r.
    let mut rows: Vec<Vec<(usize, C)>> = Vec::with_capacity(m);
    for r in 0..m {
        let j = r + 1;
        let x = a + j as f64 * h;
        let mut row = Vec::new();
        if r >= 2 {
            row.push((r - 2, C::new(-1.0, 0.0)));
        }
        if r >= 1 {
            row.push((r - 1, C::new(2.0, 0.0) + (p.eval(x) - lambda) * h * h));
        }
        row.push((r, C::new(-1.0, 0.0)));
        rows.push(row);
    }
    let mut dense: Vec<Vec<C>> = rows
        .iter()
        .map(|row| {
            let mut v = vec![C::new(0.0, 0.0); m];
            for (c, z) in row {
                v[*c] = *z;
            }
            v
        })
        .collect();
    let mut det = C::new(1.0, 0.0);
    for k in 0..m {
        let last = (k + 3).min(m);
        let piv = (k..last).max_by(|x, y| dense[*x][k].norm().total_cmp(&dense[*y][k].norm())).expect("nonempty");
        if dense[piv][k].norm() == 0.0 {
            return Ok(C::new(0.0, 0.0));
        }
        if piv != k {
            dense.swap(piv, k);
            det = -det;
        }
        let pk = dense[k][k];
        det *= pk;
        for r in k + 1..last {
            let f = dense[r][k] / pk;
            if f.norm() != 0.0 {
                for c in k..last {
                    let t = dense[k][c];
                    dense[r][c] -= f * t;
                }
            }
        }
    }
    Ok(det)
}
