//! Picard iteration for f(x) = p0 + p1(x−d) + ∫_d^x (x−y)[(V−λ)f − g](y) dy
//! on Gauss–Legendre collocation panels.

use std::sync::OnceLock;

use num_complex::Complex64 as C;

use super::dop853::State;
use super::trajectory::Panel;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

const M: usize = 16;

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `cum[i][j]` = ∫_0^{t_i} ℓ_j.
    cum: Vec<Vec<f64>>,
}

fn rule() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| {
        let (x, w) = gauss_legendre(M);
        let nodes: Vec<f64> = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
        let weights: Vec<f64> = w.iter().map(|w| 0.5 * w).collect();
        let ell = |j: usize, s: f64| -> f64 {
            (0..M).filter(|k| *k != j).map(|k| (s - nodes[k]) / (nodes[j] - nodes[k])).product()
        };
        let cum = (0..M)
            .map(|i| {
                let ti = nodes[i];
                (0..M).map(|j| (0..M).map(|k| weights[k] * ti * ell(j, ti * nodes[k])).sum()).collect()
            })
            .collect();
        Rule { nodes, weights, cum }
    })
}

pub struct Volterra<'a> {
    /// V(x) − λ with branch selector.
    pub q: &'a (dyn Fn(f64, f64) -> C + Sync),
    pub g: Option<&'a (dyn Fn(f64) -> C + Sync)>,
    pub d: f64,
    pub p0: C,
    pub p1: C,
}

pub struct VolterraSolution {
    /// Panels in increasing x.
    pub panels: Vec<Panel<2>>,
    /// (f, f′) at the far end of the panel chain.
    pub far: State<2>,
}

/// `panels` run outward from `d`, each as (near, far) ends.
pub fn solve(prob: &Volterra, panels: &[(f64, f64)], max_iter: usize) -> Result<VolterraSolution> {
    let r = rule();
    let np = panels.len();
    let xs: Vec<Vec<f64>> = panels.iter().map(|(s, t)| r.nodes.iter().map(|tau| s + (t - s) * tau).collect()).collect();
    let qs: Vec<Vec<C>> = panels
        .iter()
        .zip(&xs)
        .map(|((s, t), x)| {
            let sel = 0.5 * (s + t);
            x.iter().map(|x| (prob.q)(*x, sel)).collect()
        })
        .collect();
    let gs: Vec<Vec<C>> = xs.iter().map(|x| x.iter().map(|x| prob.g.map_or(C::new(0.0, 0.0), |g| g(*x))).collect()).collect();
    let init = |x: f64| prob.p0 + prob.p1 * (x - prob.d);
    let mut f: Vec<Vec<C>> = xs.iter().map(|x| x.iter().map(|x| init(*x)).collect()).collect();
    let mut fp: Vec<Vec<C>> = vec![vec![prob.p1; M]; np];
    let mut prev_delta = f64::INFINITY;
    for _ in 0..max_iter {
        let (mut a_acc, mut b_acc) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
        let mut delta: f64 = 0.0;
        let mut scale: f64 = 0.0;
        let mut newf = vec![vec![C::new(0.0, 0.0); M]; np];
        for p in 0..np {
            let (s, t) = panels[p];
            let len = t - s;
            let h: Vec<C> = (0..M).map(|j| qs[p][j] * f[p][j] - gs[p][j]).collect();
            let hy: Vec<C> = (0..M).map(|j| h[j] * (xs[p][j] - prob.d)).collect();
            for i in 0..M {
                let (mut ai, mut bi) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
                for j in 0..M {
                    ai += h[j] * r.cum[i][j];
                    bi += hy[j] * r.cum[i][j];
                }
                let a = a_acc + ai * len;
                let b = b_acc + bi * len;
                let x = xs[p][i];
                let v = init(x) + a * (x - prob.d) - b;
                // With f(d) = 0 compare f/(x−d), which stays O(1) near d.
                let w = if prob.p0 == C::new(0.0, 0.0) { (x - prob.d).abs().max(f64::MIN_POSITIVE) } else { 1.0 };
                delta = delta.max((v - f[p][i]).norm() / w);
                scale = scale.max(v.norm() / w);
                newf[p][i] = v;
                fp[p][i] = prob.p1 + a;
            }
            let (mut aw, mut bw) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
            for j in 0..M {
                aw += h[j] * r.weights[j];
                bw += hy[j] * r.weights[j];
            }
            a_acc += aw * len;
            b_acc += bw * len;
        }
        f = newf;
        let far = [init(panels[np - 1].1) + a_acc * (panels[np - 1].1 - prob.d) - b_acc, prob.p1 + a_acc];
        let tol = 1e-15 * scale.max(1e-300);
        if delta <= tol || (delta <= 1e3 * tol && delta >= prev_delta) || scale == 0.0 {
            let mut out: Vec<Panel<2>> = (0..np)
                .map(|p| {
                    let (s, t) = panels[p];
                    let vals: Vec<State<2>> = (0..M).map(|i| [f[p][i], fp[p][i]]).collect();
                    Panel::new(s.min(t), s.max(t), xs[p].clone(), vals)
                })
                .collect();
            out.sort_by(|a, b| a.lo.total_cmp(&b.lo));
            return Ok(VolterraSolution { panels: out, far });
        }
        prev_delta = delta;
    }
    Err(Error::Budget(format!("fixed-point iteration stalled after {max_iter} sweeps")))
}
