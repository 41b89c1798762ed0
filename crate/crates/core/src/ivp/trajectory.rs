use num_complex::Complex64 as C;

use super::dop853::{integrate, DenseStep, State, Stop, Tolerances};
use crate::error::{Error, Result};

/// Polynomial interpolant on one collocation panel (barycentric form).
#[derive(Debug, Clone)]
pub struct Panel<const N: usize> {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
    pub values: Vec<State<N>>,
}

impl<const N: usize> Panel<N> {
    pub fn new(lo: f64, hi: f64, nodes: Vec<f64>, values: Vec<State<N>>) -> Panel<N> {
        let weights = (0..nodes.len())
            .map(|j| {
                let p: f64 = (0..nodes.len()).filter(|k| *k != j).map(|k| (nodes[j] - nodes[k]) / (hi - lo)).product();
                1.0 / p
            })
            .collect();
        Panel { lo, hi, nodes, weights, values }
    }

    pub fn eval(&self, x: f64) -> State<N> {
        self.eval_d(x).0
    }

    pub fn eval_d(&self, x: f64) -> (State<N>, State<N>) {
        if let Some(k) = self.nodes.iter().position(|n| *n == x) {
            // Derivative at a node from a nearby off-node point.
            let dx = 1e-7 * (self.hi - self.lo);
            let (_, d) = self.eval_d(if x + dx < self.hi { x + dx } else { x - dx });
            return (self.values[k], d);
        }
        let mut den = 0.0;
        let mut num = [C::new(0.0, 0.0); N];
        for j in 0..self.nodes.len() {
            let t = self.weights[j] / (x - self.nodes[j]);
            den += t;
            for i in 0..N {
                num[i] += self.values[j][i] * t;
            }
        }
        let p: State<N> = std::array::from_fn(|i| num[i] / den);
        let mut dnum = [C::new(0.0, 0.0); N];
        for j in 0..self.nodes.len() {
            let r = x - self.nodes[j];
            let t = self.weights[j] / (r * r);
            for i in 0..N {
                dnum[i] += (p[i] - self.values[j][i]) * t;
            }
        }
        (p, std::array::from_fn(|i| dnum[i] / den))
    }
}

#[derive(Debug, Clone)]
pub enum Piece<const N: usize> {
    Step(DenseStep<N>),
    Panel(Panel<N>),
}

impl<const N: usize> Piece<N> {
    pub fn lo(&self) -> f64 {
        match self {
            Piece::Step(s) => s.lo(),
            Piece::Panel(p) => p.lo,
        }
    }

    pub fn hi(&self) -> f64 {
        match self {
            Piece::Step(s) => s.hi(),
            Piece::Panel(p) => p.hi,
        }
    }

    pub fn eval(&self, x: f64) -> State<N> {
        match self {
            Piece::Step(s) => s.eval(x),
            Piece::Panel(p) => p.eval(x),
        }
    }

    pub fn eval_d(&self, x: f64) -> (State<N>, State<N>) {
        match self {
            Piece::Step(s) => s.eval_d(x),
            Piece::Panel(p) => p.eval_d(x),
        }
    }

    pub fn scaled(&self, c: C) -> Piece<N> {
        match self {
            Piece::Step(s) => Piece::Step(s.scaled(c)),
            Piece::Panel(p) => {
                let mut q = p.clone();
                for v in q.values.iter_mut() {
                    for z in v.iter_mut() {
                        *z *= c;
                    }
                }
                Piece::Panel(q)
            }
        }
    }
}

/// Piecewise dense record of an ODE solution on `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pieces: Vec<Piece<N>>,
    pub anchor: f64,
    /// Points where the magnitude cap stopped integration, if any.
    pub truncated_lo: Option<f64>,
    pub truncated_hi: Option<f64>,
}

/// Right-hand side `f(x, sel, y)`; `sel` picks piecewise branches.
pub trait Rhs<const N: usize>: Fn(f64, f64, &State<N>) -> State<N> + Sync {}
impl<const N: usize, F: Fn(f64, f64, &State<N>) -> State<N> + Sync> Rhs<N> for F {}

fn run_direction<const N: usize, F: Rhs<N>>(
    f: &F,
    x0: f64,
    y0: State<N>,
    to: f64,
    breaks: &[f64],
    tol: &Tolerances,
) -> Result<(Vec<DenseStep<N>>, Option<f64>)> {
    let dir = (to - x0).signum();
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|b| (b - x0) * dir > 0.0 && (to - b) * dir > 0.0).collect();
    cuts.sort_by(|a, b| if dir > 0.0 { a.total_cmp(b) } else { b.total_cmp(a) });
    cuts.push(to);
    let mut steps = Vec::new();
    let (mut x, mut y, mut h) = (x0, y0, None);
    for c in cuts {
        let sel = 0.5 * (x + c);
        let g = |t: f64, s: &State<N>| f(t, sel, s);
        let seg = integrate(&g, x, y, c, h, tol)?;
        steps.extend(seg.steps);
        if let Stop::Overflow(xo) = seg.stop {
            return Ok((steps, Some(xo)));
        }
        x = c;
        y = seg.y_end;
        h = Some(seg.h_last);
    }
    Ok((steps, None))
}

impl<const N: usize> Trajectory<N> {
    /// Integrates from `x0` both ways to cover `[lo, hi]`, restarting at `breaks`.
    pub fn solve<F: Rhs<N>>(f: &F, x0: f64, y0: State<N>, lo: f64, hi: f64, breaks: &[f64], tol: &Tolerances) -> Result<Trajectory<N>> {
        let (right, trunc_hi) = if hi > x0 { run_direction(f, x0, y0, hi, breaks, tol)? } else { (vec![], None) };
        let (left, trunc_lo) = if lo < x0 { run_direction(f, x0, y0, lo, breaks, tol)? } else { (vec![], None) };
        let mut pieces: Vec<Piece<N>> = left.into_iter().rev().map(Piece::Step).collect();
        pieces.extend(right.into_iter().map(Piece::Step));
        if pieces.is_empty() {
            return Err(Error::InvalidArgument("empty span".into()));
        }
        Ok(Trajectory { pieces, anchor: x0, truncated_lo: trunc_lo, truncated_hi: trunc_hi })
    }

    pub fn from_pieces(pieces: Vec<Piece<N>>, anchor: f64) -> Trajectory<N> {
        Trajectory { pieces, anchor, truncated_lo: None, truncated_hi: None }
    }

    /// Appends pieces on the left (`prepend`) of the current record.
    pub fn prepend(&mut self, mut left: Vec<Piece<N>>) {
        left.append(&mut self.pieces);
        self.pieces = left;
    }

    pub fn append(&mut self, right: Vec<Piece<N>>) {
        self.pieces.extend(right);
    }

    pub fn scaled(&self, c: C) -> Trajectory<N> {
        Trajectory { pieces: self.pieces.iter().map(|p| p.scaled(c)).collect(), ..self.clone() }
    }

    pub fn pieces(&self) -> &[Piece<N>] {
        &self.pieces
    }

    pub fn lo(&self) -> f64 {
        self.pieces[0].lo()
    }

    pub fn hi(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].hi()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated_lo.is_some() || self.truncated_hi.is_some()
    }

    fn locate(&self, x: f64) -> Result<&Piece<N>> {
        let (lo, hi) = (self.lo(), self.hi());
        let slack = 1e-13 * (hi - lo).abs().max(x.abs());
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(Error::OutOfSpan { x, lo, hi });
        }
        let k = self.pieces.partition_point(|p| p.hi() < x).min(self.pieces.len() - 1);
        Ok(&self.pieces[k])
    }

    pub fn eval(&self, x: f64) -> Result<State<N>> {
        Ok(self.locate(x)?.eval(x))
    }

    pub fn eval_d(&self, x: f64) -> Result<(State<N>, State<N>)> {
        Ok(self.locate(x)?.eval_d(x))
    }

    /// Piece boundaries in increasing order.
    pub fn mesh(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.pieces.iter().map(|p| p.lo()).collect();
        m.push(self.hi());
        m
    }
}
