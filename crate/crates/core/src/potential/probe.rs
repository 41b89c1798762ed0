//! Regularity probes: ∫|V| and ∫|x−e||V| over dyadic shells approaching e.

use serde::Serialize;

use super::{Endpoint, Potential};
use crate::error::{Error, Result};
use crate::quad::{integrate_real, QuadOpts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointClass {
    Regular,
    SemiregularOnly,
    Neither,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub class: EndpointClass,
    /// Partial sums of ∫|V| over shrinking neighbourhoods.
    pub l1: Vec<f64>,
    /// Partial sums of ∫|x−e||V|.
    pub weighted: Vec<f64>,
}

const MAX_SHELLS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Verdict {
    Converges,
    Diverges,
}

fn verdict(s: &[f64]) -> Option<Verdict> {
    let n = s.len();
    if n >= 3 {
        let last = s[n - 1];
        if last == 0.0 && s.iter().all(|v| *v == 0.0) {
            return Some(Verdict::Converges);
        }
        let agree = |i: usize| (s[i] - s[i - 1]).abs() <= 1e-8 * s[i].abs();
        if agree(n - 1) && agree(n - 2) {
            return Some(Verdict::Converges);
        }
    }
    if n >= 4 && (1..4).all(|k| s[n - k] >= 2.0 * s[n - k - 1] && s[n - k - 1] > 0.0) {
        return Some(Verdict::Diverges);
    }
    // Logarithmic divergence: shell contributions stop shrinking.
    if n >= 12 {
        let inc: Vec<f64> = (n - 6..n).map(|i| s[i] - s[i - 1]).collect();
        if inc[0] > 0.0 && inc.windows(2).all(|w| w[1] >= 0.99 * w[0]) {
            return Some(Verdict::Diverges);
        }
    }
    None
}

/// Classifies an endpoint as regular, semiregular only, or neither.
/// Heuristic: shells ]e+δ2^{-k-1}, e+δ2^{-k}[ with δ ≤ 1.
pub fn probe_endpoint(p: &Potential, which: Endpoint) -> Result<ProbeReport> {
    let iv = p.interval();
    let e = iv.end(which);
    if !e.is_finite() {
        return Ok(ProbeReport { class: EndpointClass::Neither, l1: vec![], weighted: vec![] });
    }
    let other = iv.end(which.other());
    let delta = if other.is_finite() { (0.5 * (other - e).abs()).min(1.0) } else { 1.0 };
    let sign = if which == Endpoint::A { 1.0 } else { -1.0 };
    let opts = QuadOpts { rel_tol: 1e-11, abs_tol: 0.0, max_panels: 2000 };
    let floor = 64.0 * f64::EPSILON * e.abs().max(f64::MIN_POSITIVE);

    let (mut s1, mut s2) = (0.0, 0.0);
    let (mut l1, mut weighted) = (Vec::new(), Vec::new());
    let (mut v1, mut v2) = (None, None);
    for k in 0..MAX_SHELLS {
        let outer = delta * 0.5f64.powi(k as i32);
        let inner = 0.5 * outer;
        if inner <= floor {
            break;
        }
        let (x0, x1) = if sign > 0.0 { (e + inner, e + outer) } else { (e - outer, e - inner) };
        let pts = p.breakpoints_in(x0, x1).to_vec();
        if v1.is_none() {
            let (v, _) = integrate_real(|x| p.eval(x).norm(), x0, x1, &pts, opts).map_err(|_| Error::ProbeIndeterminate { partial: l1.clone() })?;
            s1 += v;
            l1.push(s1);
            v1 = verdict(&l1);
        }
        if v2.is_none() {
            let (v, _) = integrate_real(|x| (x - e).abs() * p.eval(x).norm(), x0, x1, &pts, opts)
                .map_err(|_| Error::ProbeIndeterminate { partial: weighted.clone() })?;
            s2 += v;
            weighted.push(s2);
            v2 = verdict(&weighted);
        }
        if v1.is_some() && v2.is_some() {
            break;
        }
        if v1 == Some(Verdict::Converges) {
            // Integrability of V implies integrability of (x−e)V.
            v2.get_or_insert(Verdict::Converges);
            break;
        }
    }
    let class = match (v1, v2) {
        (Some(Verdict::Converges), _) => EndpointClass::Regular,
        (Some(Verdict::Diverges), Some(Verdict::Converges)) => EndpointClass::SemiregularOnly,
        (Some(Verdict::Diverges), Some(Verdict::Diverges)) => EndpointClass::Neither,
        (None, _) => return Err(Error::ProbeIndeterminate { partial: l1 }),
        (_, None) => return Err(Error::ProbeIndeterminate { partial: weighted }),
    };
    Ok(ProbeReport { class, l1, weighted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{parse_potential, Interval};

    fn class(src: &str, a: f64, b: f64, e: Endpoint) -> EndpointClass {
        let p = parse_potential(src, Interval::new(a, b).unwrap()).unwrap();
        probe_endpoint(&p, e).unwrap().class
    }

    #[test]
    fn classic_cases() {
        assert_eq!(class("0", 0.0, 1.0, Endpoint::A), EndpointClass::Regular);
        assert_eq!(class("1/x^2", 0.0, 1.0, Endpoint::A), EndpointClass::Neither);
        assert_eq!(class("1/x", 0.0, 1.0, Endpoint::A), EndpointClass::SemiregularOnly);
        assert_eq!(class("1/sqrt(x)", 0.0, 1.0, Endpoint::A), EndpointClass::Regular);
        assert_eq!(class("1/(1-x)", 0.0, 1.0, Endpoint::B), EndpointClass::SemiregularOnly);
        assert_eq!(class("x", 0.0, f64::INFINITY, Endpoint::B), EndpointClass::Neither);
        assert_eq!(class("3 + 2i*x", -1.0, 2.0, Endpoint::A), EndpointClass::Regular);
    }
}
