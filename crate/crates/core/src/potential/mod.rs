//! Potentials V on an interval ]a,b[ and endpoint probing.

mod expr;
mod parser;
pub mod pathological;
mod probe;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

pub use expr::{Expr, Func};
pub use parser::parse_expr;
pub use pathological::Pathological;
pub use probe::{probe_endpoint, EndpointClass, ProbeReport};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    A,
    B,
}

impl Endpoint {
    pub fn other(self) -> Endpoint {
        match self {
            Endpoint::A => Endpoint::B,
            Endpoint::B => Endpoint::A,
        }
    }
}

/// ]a,b[ with a possibly −∞ and b possibly +∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "IntervalRepr", try_from = "IntervalRepr")]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    a: Option<f64>,
    b: Option<f64>,
    a_finite: bool,
    b_finite: bool,
}

impl From<Interval> for IntervalRepr {
    fn from(i: Interval) -> Self {
        IntervalRepr {
            a: i.a.is_finite().then_some(i.a),
            b: i.b.is_finite().then_some(i.b),
            a_finite: i.a.is_finite(),
            b_finite: i.b.is_finite(),
        }
    }
}

impl TryFrom<IntervalRepr> for Interval {
    type Error = Error;
    fn try_from(r: IntervalRepr) -> Result<Interval> {
        let a = match (r.a, r.a_finite) {
            (Some(a), true) => a,
            (None, false) => f64::NEG_INFINITY,
            _ => return Err(Error::InvalidArgument("endpoint a inconsistent with a_finite".into())),
        };
        let b = match (r.b, r.b_finite) {
            (Some(b), true) => b,
            (None, false) => f64::INFINITY,
            _ => return Err(Error::InvalidArgument("endpoint b inconsistent with b_finite".into())),
        };
        Interval::new(a, b)
    }
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Interval> {
        if a.is_nan() || b.is_nan() || a == f64::INFINITY || b == f64::NEG_INFINITY || a >= b {
            return Err(Error::InvalidArgument(format!("invalid interval ]{a}, {b}[")));
        }
        Ok(Interval { a, b })
    }

    pub fn end(&self, e: Endpoint) -> f64 {
        match e {
            Endpoint::A => self.a,
            Endpoint::B => self.b,
        }
    }

    pub fn contains_open(&self, x: f64) -> bool {
        x > self.a && x < self.b
    }

    /// A fixed interior reference point.
    pub fn anchor(&self) -> f64 {
        match (self.a.is_finite(), self.b.is_finite()) {
            (true, true) => 0.5 * (self.a + self.b),
            (true, false) => self.a + 1.0,
            (false, true) => self.b - 1.0,
            (false, false) => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EndpointMeta {
    pub regular: bool,
    pub semiregular: bool,
    pub im_nonpositive_hint: Option<bool>,
    #[serde(default)]
    pub probed: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Expr(Expr),
    Pathological(Pathological),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    interval: Interval,
    source: String,
    kind: Kind,
    breaks: Vec<f64>,
    pub meta: [EndpointMeta; 2],
}

/// JSON form `{interval, expr, meta}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialRepr {
    pub interval: Interval,
    pub expr: String,
    #[serde(default)]
    pub meta: PotentialMetaRepr,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PotentialMetaRepr {
    pub a: EndpointMeta,
    pub b: EndpointMeta,
}

pub fn parse_potential(source: &str, interval: Interval) -> Result<Potential> {
    let trimmed = source.trim();
    if let Some(n) = trimmed.strip_prefix("pathological(").and_then(|r| r.strip_suffix(')')) {
        let count: usize = n.trim().parse().map_err(|_| Error::Syntax { pos: 13, msg: "expected prime count".into() })?;
        let mut p = pathological_potential(count)?;
        p.interval = interval;
        return Ok(p);
    }
    let expr = parse_expr(source)?;
    let mut breaks = Vec::new();
    expr.breakpoints(&mut breaks);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    Ok(Potential { interval, source: source.to_string(), kind: Kind::Expr(expr), breaks, meta: Default::default() })
}

pub fn pathological_potential(count: usize) -> Result<Potential> {
    if count == 0 {
        return Err(Error::InvalidArgument("pathological potential needs at least one prime".into()));
    }
    let p = Pathological::new(count);
    let breaks = p.breakpoints().to_vec();
    Ok(Potential {
        interval: Interval { a: 0.0, b: f64::INFINITY },
        source: format!("pathological({count})"),
        kind: Kind::Pathological(p),
        breaks,
        meta: Default::default(),
    })
}

impl Potential {
    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.kind {
            Kind::Expr(e) => Some(e),
            Kind::Pathological(_) => None,
        }
    }

    pub fn eval(&self, x: f64) -> C {
        self.eval_sel(x, x)
    }

    /// Value at `x` with piecewise branches chosen at `sel`; integrators pass
    /// the midpoint of the current step so a step ending on a breakpoint
    /// sees one branch only.
    pub fn eval_sel(&self, x: f64, sel: f64) -> C {
        match &self.kind {
            Kind::Expr(e) => e.eval_sel(x, sel),
            Kind::Pathological(p) => p.eval(sel),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// Breakpoints strictly inside `]lo, hi[`.
    pub fn breakpoints_in(&self, lo: f64, hi: f64) -> &[f64] {
        let i = self.breaks.partition_point(|b| *b <= lo);
        let j = self.breaks.partition_point(|b| *b < hi);
        &self.breaks[i..j.max(i)]
    }

    pub fn meta(&self, e: Endpoint) -> &EndpointMeta {
        &self.meta[e as usize]
    }

    /// Probes both endpoints and records the result in `meta`.
    pub fn probed(mut self) -> Result<Potential> {
        for e in [Endpoint::A, Endpoint::B] {
            let r = probe_endpoint(&self, e)?;
            let m = &mut self.meta[e as usize];
            m.regular = r.class == EndpointClass::Regular;
            m.semiregular = r.class != EndpointClass::Neither;
            m.probed = true;
        }
        Ok(self)
    }

    pub fn is_regular(&self, e: Endpoint) -> Result<bool> {
        if self.meta(e).probed {
            return Ok(self.meta(e).regular);
        }
        Ok(probe_endpoint(self, e)?.class == EndpointClass::Regular)
    }

    pub fn is_semiregular(&self, e: Endpoint) -> Result<bool> {
        if self.meta(e).probed {
            return Ok(self.meta(e).semiregular);
        }
        Ok(probe_endpoint(self, e)?.class != EndpointClass::Neither)
    }

    pub fn to_repr(&self) -> PotentialRepr {
        PotentialRepr {
            interval: self.interval,
            expr: self.source.clone(),
            meta: PotentialMetaRepr { a: self.meta[0], b: self.meta[1] },
        }
    }

    pub fn from_repr(r: &PotentialRepr) -> Result<Potential> {
        let mut p = parse_potential(&r.expr, r.interval)?;
        p.meta = [r.meta.a, r.meta.b];
        for m in &p.meta {
            if m.regular && !m.semiregular {
                return Err(Error::InvalidArgument("regular endpoint must be semiregular".into()));
            }
        }
        for e in [Endpoint::A, Endpoint::B] {
            if p.meta(e).regular && !p.interval.end(e).is_finite() {
                return Err(Error::InvalidArgument("regular endpoint must be finite".into()));
            }
        }
        Ok(p)
    }
}
