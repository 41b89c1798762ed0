//! Piecewise-constant potential with value c_p on J_p = ∪_k I_{p^k},
//! I_n = ]n²−n, n²+n[, for the first few primes p.

use num_complex::Complex64 as C;

/// Prime powers are enumerated up to this n, so the potential is
/// represented on ]0, N²+N[ and vanishes beyond.
pub const MAX_BASE: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Pathological {
    pub count: usize,
    /// Disjoint half-open pieces `[lo, hi)` sorted by `lo`.
    pieces: Vec<(f64, f64, C)>,
    breaks: Vec<f64>,
}

pub fn primes(count: usize) -> Vec<u64> {
    let mut ps: Vec<u64> = Vec::with_capacity(count);
    let mut n = 2;
    while ps.len() < count {
        if ps.iter().take_while(|p| *p * *p <= n).all(|p| n % p != 0) {
            ps.push(n);
        }
        n += 1;
    }
    ps
}

fn fusc(mut n: u64) -> u64 {
    let (mut a, mut b) = (1u64, 0u64);
    while n > 0 {
        if n & 1 == 1 {
            b += a;
        } else {
            a += b;
        }
        n >>= 1;
    }
    b
}

/// Enumeration of Q: 1, −1, 0, then ±q for the Calkin–Wilf sequence from 1/2 on.
pub fn rational(m: u64) -> f64 {
    let cw = |j: u64| fusc(j) as f64 / fusc(j + 1) as f64;
    match m {
        0 => 1.0,
        1 => -1.0,
        2 => 0.0,
        _ => {
            let k = m - 3;
            let q = cw(k / 2 + 2);
            if k % 2 == 0 {
                q
            } else {
                -q
            }
        }
    }
}

pub fn unpair(n: u64) -> (u64, u64) {
    let w = ((((8 * n + 1) as f64).sqrt() - 1.0) / 2.0).floor() as u64;
    let w = (w.saturating_sub(1)..=w + 1).filter(|w| w * (w + 1) / 2 <= n).max().unwrap_or(0);
    let j = n - w * (w + 1) / 2;
    (w - j, j)
}

/// c for the prime with zero-based index `n` (so 2 ↦ 1+i).
pub fn complex_rational(n: u64) -> C {
    let (i, j) = unpair(n);
    C::new(rational(i), rational(j))
}

impl Pathological {
    pub fn new(count: usize) -> Pathological {
        let mut pieces = Vec::new();
        for (idx, p) in primes(count).into_iter().enumerate() {
            let c = complex_rational(idx as u64);
            let mut n = p;
            while n <= MAX_BASE {
                let nf = n as f64;
                pieces.push((nf * nf - nf, nf * nf + nf, c));
                n *= p;
            }
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breaks: Vec<f64> = pieces.iter().flat_map(|p| [p.0, p.1]).collect();
        breaks.dedup();
        Pathological { count, pieces, breaks }
    }

    pub fn eval(&self, sel: f64) -> C {
        let k = self.pieces.partition_point(|p| p.0 <= sel);
        if k > 0 {
            let (_, hi, c) = self.pieces[k - 1];
            if sel < hi {
                return c;
            }
        }
        C::new(0.0, 0.0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[(f64, f64, C)] {
        &self.pieces
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_start() {
        let q: Vec<f64> = (0..9).map(rational).collect();
        assert_eq!(q, vec![1.0, -1.0, 0.0, 0.5, -0.5, 2.0, -2.0, 1.0 / 3.0, -1.0 / 3.0]);
        assert_eq!(complex_rational(0), C::new(1.0, 1.0));
        assert_eq!(unpair(1), (1, 0));
        assert_eq!(unpair(2), (0, 1));
        for n in 0..5000 {
            let (i, j) = unpair(n);
            let w = i + j;
            assert_eq!(w * (w + 1) / 2 + j, n);
        }
    }

    #[test]
    fn adjacent_pieces_merge_breaks() {
        let p = Pathological::new(2);
        assert_eq!(p.eval(3.5), C::new(1.0, 1.0));
        assert_eq!(p.eval(6.0), complex_rational(1));
        assert_eq!(p.eval(5.999), C::new(1.0, 1.0));
        assert_eq!(p.breakpoints().iter().filter(|b| **b == 6.0).count(), 1);
    }
}
