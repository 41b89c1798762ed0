//! Initial-value problems for (L−λ)f = g, the fourth-order system
//! (L L̄ + λ)f = 0, and the Wronskian identities.

pub mod dop853;
mod identities;
mod quad_system;
pub mod trajectory;
mod volterra;

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64 as C;

pub use dop853::{State, Tolerances};
pub use identities::{kodaira_check, lagrange_residual, wronskian};
pub use quad_system::{solve_quad_system, QuadSystemTrajectory};
use trajectory::{Panel, Piece, Trajectory};

use crate::error::{Error, Result};
use crate::potential::{Endpoint, Potential};
use crate::quad::{integrate_real, QuadOpts};

/// A right-hand side g, optionally with compact support.
#[derive(Clone)]
pub struct Source {
    f: Arc<dyn Fn(f64) -> C + Send + Sync>,
    support: Option<(f64, f64)>,
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Source").field("support", &self.support).finish_non_exhaustive()
    }
}

impl Source {
    pub fn new(f: impl Fn(f64) -> C + Send + Sync + 'static) -> Source {
        Source { f: Arc::new(f), support: None }
    }

    /// `f` restricted to `[lo, hi]`, zero elsewhere.
    pub fn compact(f: impl Fn(f64) -> C + Send + Sync + 'static, lo: f64, hi: f64) -> Source {
        Source { f: Arc::new(f), support: Some((lo, hi)) }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn eval(&self, x: f64) -> C {
        match self.support {
            Some((lo, hi)) if x < lo || x > hi => C::new(0.0, 0.0),
            _ => (self.f)(x),
        }
    }

    pub fn breaks(&self) -> Vec<f64> {
        self.support.map(|(a, b)| vec![a, b]).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IvpOptions {
    pub tol: Tolerances,
}

/// Dense record of one solution of (L−λ)f = g; state is (f, f′).
#[derive(Debug, Clone)]
pub struct SolutionTrajectory {
    pub lambda: C,
    rhs: Option<Source>,
    traj: Trajectory<2>,
}

impl SolutionTrajectory {
    pub fn rhs(&self) -> Option<&Source> {
        self.rhs.as_ref()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.rhs.is_none()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.traj.lo(), self.traj.hi())
    }

    pub fn anchor(&self) -> f64 {
        self.traj.anchor
    }

    /// (f(x), f′(x)).
    pub fn eval(&self, x: f64) -> Result<(C, C)> {
        let y = self.traj.eval(x)?;
        Ok((y[0], y[1]))
    }

    pub fn value(&self, x: f64) -> Result<C> {
        Ok(self.traj.eval(x)?[0])
    }

    /// (Lf)(x) = λf(x) + g(x).
    pub fn l_apply(&self, x: f64) -> Result<C> {
        Ok(self.lambda * self.value(x)? + self.rhs.as_ref().map_or(C::new(0.0, 0.0), |g| g.eval(x)))
    }

    /// −f″ + (V−λ)f − g, with f″ from the derivative of the dense output.
    pub fn residual(&self, p: &Potential, x: f64) -> Result<C> {
        let (y, dy) = self.traj.eval_d(x)?;
        let g = self.rhs.as_ref().map_or(C::new(0.0, 0.0), |g| g.eval(x));
        Ok(-dy[1] + (p.eval(x) - self.lambda) * y[0] - g)
    }

    pub fn mesh(&self) -> Vec<f64> {
        self.traj.mesh()
    }

    pub fn samples(&self) -> Vec<(f64, C, C)> {
        self.mesh()
            .into_iter()
            .map(|x| {
                let (f, fp) = self.eval(x).expect("mesh point in span");
                (x, f, fp)
            })
            .collect()
    }

    pub fn is_truncated(&self) -> bool {
        self.traj.is_truncated()
    }

    /// Overflow stop points on the left and right, if any.
    pub fn truncation(&self) -> (Option<f64>, Option<f64>) {
        (self.traj.truncated_lo, self.traj.truncated_hi)
    }

    pub fn scaled(&self, c: C) -> SolutionTrajectory {
        SolutionTrajectory { lambda: self.lambda, rhs: self.rhs.clone(), traj: self.traj.scaled(c) }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,re_f,im_f,re_df,im_df")?;
        for (x, f, fp) in self.samples() {
            writeln!(w, "{x:e},{:e},{:e},{:e},{:e}", f.re, f.im, fp.re, fp.im)?;
        }
        Ok(())
    }
}

pub(crate) fn schrodinger_rhs<'a>(p: &'a Potential, lambda: C, g: Option<&'a Source>) -> impl Fn(f64, f64, &State<2>) -> State<2> + Sync + 'a {
    move |x, sel, y| {
        let gx = g.map_or(C::new(0.0, 0.0), |g| g.eval(x));
        [y[1], (p.eval_sel(x, sel) - lambda) * y[0] - gx]
    }
}

fn check_span(p: &Potential, d: f64, span: (f64, f64)) -> Result<()> {
    let iv = p.interval();
    let (lo, hi) = span;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && lo <= d && d <= hi && lo >= iv.a && hi <= iv.b) {
        return Err(Error::InvalidArgument(format!("span [{lo}, {hi}] with anchor {d} is not inside the interval")));
    }
    for e in [Endpoint::A, Endpoint::B] {
        let x = iv.end(e);
        if (lo == x || hi == x) && !p.is_regular(e)? {
            return Err(Error::InvalidArgument(format!("span reaches the non-regular endpoint {x}")));
        }
    }
    Ok(())
}

fn finite(z: C) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Solves (L−λ)f = g with f(d) = p0, f′(d) = p1 over `span`.
#[allow(clippy::too_many_arguments)]
pub fn solve_ivp(p: &Potential, lambda: C, d: f64, p0: C, p1: C, g: Option<&Source>, span: (f64, f64), opts: &IvpOptions) -> Result<SolutionTrajectory> {
    check_span(p, d, span)?;
    let iv = p.interval();
    let at_end = [Endpoint::A, Endpoint::B].into_iter().find(|e| iv.end(*e) == d);
    let mut breaks: Vec<f64> = p.breakpoints_in(span.0, span.1).to_vec();
    if let Some(g) = g {
        breaks.extend(g.breaks());
    }
    let rhs = schrodinger_rhs(p, lambda, g);
    let inward = |e: Endpoint| if e == Endpoint::A { d + 1e-9 * (span.1 - d) } else { d - 1e-9 * (d - span.0) };
    if let Some(e) = at_end {
        if !finite(p.eval_sel(d, inward(e))) {
            let start = endpoint_start(p, lambda, e, p0, p1, g)?;
            return continue_from(p, lambda, g, e, start, span, &breaks, opts);
        }
    }
    let traj = Trajectory::solve(&rhs, d, [p0, p1], span.0, span.1, &breaks, &opts.tol)?;
    Ok(SolutionTrajectory { lambda, rhs: g.cloned(), traj })
}

struct Start {
    panels: Vec<Panel<2>>,
    x: f64,
    y: State<2>,
}

#[allow(clippy::too_many_arguments)]
fn continue_from(p: &Potential, lambda: C, g: Option<&Source>, e: Endpoint, start: Start, span: (f64, f64), breaks: &[f64], opts: &IvpOptions) -> Result<SolutionTrajectory> {
    let rhs = schrodinger_rhs(p, lambda, g);
    let pieces: Vec<Piece<2>> = start.panels.into_iter().map(Piece::Panel).collect();
    let anchor = p.interval().end(e);
    let inside = span.0 < start.x && start.x < span.1;
    let traj = if !inside {
        Trajectory::from_pieces(pieces, anchor)
    } else if e == Endpoint::A {
        let mut t = Trajectory::solve(&rhs, start.x, start.y, start.x, span.1, breaks, &opts.tol)?;
        t.prepend(pieces);
        t.anchor = anchor;
        t
    } else {
        let mut t = Trajectory::solve(&rhs, start.x, start.y, span.0, start.x, breaks, &opts.tol)?;
        t.append(pieces);
        t.anchor = anchor;
        t
    };
    Ok(SolutionTrajectory { lambda, rhs: g.cloned(), traj })
}

/// Width w with ∫|V−λ||y−e| ≤ 1/2 over the window of width w at `e`.
fn contraction_window(p: &Potential, lambda: C, e: Endpoint) -> Result<f64> {
    let iv = p.interval();
    let x = iv.end(e);
    let other = iv.end(e.other());
    let mut w = if other.is_finite() { 0.5 * (other - x).abs() } else { 1.0 };
    w = w.min(1.0);
    let sgn = if e == Endpoint::A { 1.0 } else { -1.0 };
    let opts = QuadOpts { rel_tol: 1e-6, abs_tol: 1e-14, max_panels: 2000 };
    let weighted = |w: f64| -> Result<f64> {
        let mut s = 0.0;
        for k in 0..60 {
            let (o, i) = (w * 0.5f64.powi(k), w * 0.5f64.powi(k + 1));
            let (x0, x1) = if sgn > 0.0 { (x + i, x + o) } else { (x - o, x - i) };
            if x0 >= x1 || x0 == x || x1 == x {
                break;
            }
            let pts = p.breakpoints_in(x0, x1).to_vec();
            let (v, _) = integrate_real(|y| (p.eval(y) - lambda).norm() * (y - x).abs(), x0, x1, &pts, opts)?;
            s += v;
            if v < 1e-17 * s.max(1e-300) {
                break;
            }
        }
        Ok(s)
    };
    for _ in 0..60 {
        if x + sgn * w * 0.5f64.powi(8) == x {
            break;
        }
        if weighted(w)? <= 0.5 {
            return Ok(w);
        }
        w *= 0.5;
    }
    Err(Error::WindowTooSmall)
}

fn endpoint_start(p: &Potential, lambda: C, e: Endpoint, p0: C, p1: C, g: Option<&Source>) -> Result<Start> {
    let x = p.interval().end(e);
    let w = contraction_window(p, lambda, e)?;
    let sgn = if e == Endpoint::A { 1.0 } else { -1.0 };
    // Geometric panels toward the endpoint, innermost first.
    // Innermost panel must stay resolvable next to x in floating point.
    let floor = 1e4 * f64::EPSILON * x.abs();
    let levels = (0..=48).take_while(|k| w * 0.5f64.powi(*k) >= floor).last().unwrap_or(0);
    let mut cuts = vec![x];
    for k in (0..=levels).rev() {
        cuts.push(x + sgn * w * 0.5f64.powi(k));
    }
    for b in p.breakpoints_in(x.min(x + sgn * w), x.max(x + sgn * w)) {
        cuts.push(*b);
    }
    cuts.sort_by(|a, b| ((a - x) * sgn).total_cmp(&((b - x) * sgn)));
    cuts.dedup();
    let panels: Vec<(f64, f64)> = cuts.windows(2).map(|c| (c[0], c[1])).collect();
    let q = |y: f64, sel: f64| p.eval_sel(y, sel) - lambda;
    let gf = g.map(|g| move |y: f64| g.eval(y));
    let gref: Option<&(dyn Fn(f64) -> C + Sync)> = gf.as_ref().map(|f| f as &(dyn Fn(f64) -> C + Sync));
    let sol = volterra::solve(&volterra::Volterra { q: &q, g: gref, d: x, p0, p1 }, &panels, 200)?;
    Ok(Start { panels: sol.panels, x: x + sgn * w, y: sol.far })
}

/// The solution with f(e) = 0, f′(e) = p1 at a semiregular endpoint,
/// continued up to `reach`.
pub fn solve_semiregular(p: &Potential, lambda: C, endpoint: Endpoint, p1: C, reach: f64, opts: &IvpOptions) -> Result<SolutionTrajectory> {
    if !p.is_semiregular(endpoint)? {
        return Err(Error::NotSemiregular);
    }
    let iv = p.interval();
    let e = iv.end(endpoint);
    if !iv.contains_open(reach) {
        return Err(Error::InvalidArgument(format!("reach {reach} is not interior")));
    }
    let start = endpoint_start(p, lambda, endpoint, C::new(0.0, 0.0), p1, None)?;
    let span = if endpoint == Endpoint::A { (e, reach) } else { (reach, e) };
    let breaks = p.breakpoints_in(span.0, span.1).to_vec();
    continue_from(p, lambda, None, endpoint, start, span, &breaks, opts)
}

/// G_d g on `window` by the fixed-point iteration f = Q_d f − T_d g,
/// i.e. the solution of Lf = g with f(d) = f′(d) = 0.
pub fn neumann_solve(p: &Potential, d: f64, g: &Source, window: (f64, f64)) -> Result<SolutionTrajectory> {
    let (a1, b1) = window;
    let iv = p.interval();
    if !(a1 < d && d < b1 && a1 >= iv.a && b1 <= iv.b && a1.is_finite() && b1.is_finite()) {
        return Err(Error::InvalidArgument("window must be finite, inside the interval, and contain d".into()));
    }
    let opts = QuadOpts { rel_tol: 1e-8, abs_tol: 1e-15, max_panels: 4000 };
    let (left, _) = integrate_real(|x| p.eval(x).norm() * (x - a1).abs(), a1, d, p.breakpoints_in(a1, d), opts)?;
    let (right, _) = integrate_real(|x| p.eval(x).norm() * (x - b1).abs(), d, b1, p.breakpoints_in(d, b1), opts)?;
    let bound = left.max(right);
    if bound >= 1.0 {
        return Err(Error::Contraction { bound });
    }
    let q = |y: f64, sel: f64| p.eval_sel(y, sel);
    let gf = |y: f64| g.eval(y);
    let mut pieces = Vec::new();
    for end in [a1, b1] {
        let mut cuts: Vec<f64> = p.breakpoints_in(d.min(end), d.max(end)).to_vec();
        cuts.extend(g.breaks().into_iter().filter(|b| (b - d) * (end - b) > 0.0));
        let n = 16;
        cuts.extend((0..=n).map(|k| d + (end - d) * k as f64 / n as f64));
        cuts.sort_by(|a, b| ((a - d) * (end - d)).total_cmp(&((b - d) * (end - d))));
        cuts.dedup();
        let panels: Vec<(f64, f64)> = cuts.windows(2).map(|c| (c[0], c[1])).collect();
        let z = C::new(0.0, 0.0);
        let sol = volterra::solve(&volterra::Volterra { q: &q, g: Some(&gf), d, p0: z, p1: z }, &panels, 400)?;
        pieces.push(sol.panels);
    }
    let right = pieces.pop().expect("two sides");
    let left = pieces.pop().expect("two sides");
    let all: Vec<Piece<2>> = left.into_iter().chain(right).map(Piece::Panel).collect();
    Ok(SolutionTrajectory { lambda: C::new(0.0, 0.0), rhs: Some(g.clone()), traj: Trajectory::from_pieces(all, d) })
}

/// State (f, f′, ∂λf, ∂λf′) at `to` for Lf = λf started at `d` with `y0`;
/// the λ-derivative obeys ∂λf″ = (V−λ)∂λf − f.
pub fn solve_variational(p: &Potential, lambda: C, d: f64, y0: State<4>, to: f64, opts: &IvpOptions) -> Result<State<4>> {
    let (lo, hi) = if d < to { (d, to) } else { (to, d) };
    check_span(p, d, (lo, hi))?;
    if !y0.iter().all(|z| finite(*z)) || !finite(p.eval_sel(d, 0.5 * (d + to))) {
        return Err(Error::InvalidArgument(format!("variational start at {d} is not finite")));
    }
    let rhs = |x: f64, sel: f64, y: &State<4>| {
        let q = p.eval_sel(x, sel) - lambda;
        [y[1], q * y[0], y[3], q * y[2] - y[0]]
    };
    let traj = Trajectory::solve(&rhs, d, y0, lo, hi, p.breakpoints_in(lo, hi), &opts.tol)?;
    if traj.is_truncated() {
        return Err(Error::Budget(format!("variational solution overflowed before {to}")));
    }
    traj.eval(to)
}
