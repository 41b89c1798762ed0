use num_complex::Complex64 as C;

use super::dop853::State;
use super::trajectory::Trajectory;
use super::IvpOptions;
use crate::error::{Error, Result};
use crate::potential::Potential;

/// Solution φ = (F, −F′) of J∂φ = (λA + B)φ, F = (f, L̄f).
#[derive(Debug, Clone)]
pub struct QuadSystemTrajectory {
    pub lambda: C,
    traj: Trajectory<4>,
}

impl QuadSystemTrajectory {
    pub fn eval(&self, x: f64) -> Result<State<4>> {
        self.traj.eval(x)
    }

    pub fn eval_d(&self, x: f64) -> Result<(State<4>, State<4>)> {
        self.traj.eval_d(x)
    }

    pub fn span(&self) -> (f64, f64) {
        (self.traj.lo(), self.traj.hi())
    }

    pub fn mesh(&self) -> Vec<f64> {
        self.traj.mesh()
    }

    pub fn is_truncated(&self) -> bool {
        self.traj.is_truncated()
    }
}

/// Explicit form: F′ = −G, G′ = −Q(W + λI)F.
pub fn solve_quad_system(p: &Potential, lambda: C, d: f64, phi0: State<4>, span: (f64, f64), opts: &IvpOptions) -> Result<QuadSystemTrajectory> {
    let iv = p.interval();
    let ok = span.0 < span.1 && span.0 <= d && d <= span.1 && span.0 >= iv.a && span.1 <= iv.b;
    if !ok || !span.0.is_finite() || !span.1.is_finite() {
        return Err(Error::InvalidArgument("quad-system span must be finite, inside the interval, and contain d".into()));
    }
    let rhs = |x: f64, sel: f64, y: &State<4>| {
        let v = p.eval_sel(x, sel);
        [-y[2], -y[3], -v.conj() * y[0] + y[1], -lambda * y[0] - v * y[1]]
    };
    let breaks = p.breakpoints_in(span.0, span.1).to_vec();
    let traj = Trajectory::solve(&rhs, d, phi0, span.0, span.1, &breaks, &opts.tol)?;
    Ok(QuadSystemTrajectory { lambda, traj })
}
