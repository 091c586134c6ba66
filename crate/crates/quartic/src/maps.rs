//! Labeled 4-valent ribbon graphs: brute-force census by genus, closed-form
//! counts for low genus, and the constants governing their large-size growth.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::algebra::{fmt_rational, q, qr, QuadExt, Q};
use crate::topo::factorial;

/// Largest vertex count enumerated without the explicit opt-in.
pub const CENSUS_CAP: usize = 5;
/// Absolute largest vertex count (`23!!` pairings).
pub const CENSUS_HARD_CAP: usize = 6;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MapsError {
    #[error("{0} vertices exceeds the enumeration cap")]
    CapExceeded(usize),
    #[error("closed forms are available for genus 0 to 3, not {0}")]
    UnsupportedGenus(usize),
    #[error("vertex count must be positive")]
    EmptyGraph,
}

/// Genus-resolved count of connected labeled 4-valent graphs on `j` vertices.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct MapCensus {
    pub j: usize,
    /// `counts[g]` for `g = 0..=2j`.
    pub counts: Vec<u64>,
    /// Number of connected pairings.
    pub connected: u64,
    /// Number of pairings visited, `(4j−1)!!`.
    pub pairings: u64,
}

/// Rotation at a vertex: the next half-edge counterclockwise.
#[inline]
fn rot(h: usize) -> usize {
    (h & !3) | ((h + 1) & 3)
}

struct Walker {
    n: usize,
    pair: [u8; 24],
    counts: Vec<u64>,
    pairings: u64,
}

impl Walker {
    fn new(j: usize) -> Self {
        Walker { n: 4 * j, pair: [u8::MAX; 24], counts: vec![0; 2 * j + 1], pairings: 0 }
    }

    fn descend(&mut self) {
        let first = (0..self.n).find(|&h| self.pair[h] == u8::MAX);
        let h = match first {
            Some(h) => h,
            None => return self.leaf(),
        };
        for p in (h + 1)..self.n {
            if self.pair[p] != u8::MAX {
                continue;
            }
            self.pair[h] = p as u8;
            self.pair[p] = h as u8;
            self.descend();
            self.pair[h] = u8::MAX;
            self.pair[p] = u8::MAX;
        }
    }

    fn leaf(&mut self) {
        self.pairings += 1;
        let j = self.n / 4;
        let mut parent = [0u8; 6];
        for (v, slot) in parent.iter_mut().enumerate().take(j) {
            *slot = v as u8;
        }
        fn find(p: &mut [u8; 6], mut v: usize) -> usize {
            while p[v] as usize != v {
                p[v] = p[p[v] as usize];
                v = p[v] as usize;
            }
            v
        }
        let mut comps = j;
        for h in 0..self.n {
            let a = find(&mut parent, h / 4);
            let b = find(&mut parent, self.pair[h] as usize / 4);
            if a != b {
                parent[a] = b as u8;
                comps -= 1;
            }
        }
        if comps != 1 {
            return;
        }
        let mut seen: u32 = 0;
        let mut faces = 0usize;
        for start in 0..self.n {
            if seen & (1 << start) != 0 {
                continue;
            }
            faces += 1;
            let mut h = start;
            while seen & (1 << h) == 0 {
                seen |= 1 << h;
                h = rot(self.pair[h] as usize);
            }
        }
        // V − E + F = 2 − 2g with V = j, E = 2j
        let g = (2 + j - faces) / 2;
        self.counts[g] += 1;
    }
}

/// Enumerate every perfect matching of the `4j` half-edges, always pairing the
/// smallest unmatched half-edge first, and count connected ones by genus.
///
/// `allow_large` unlocks `j = 6`.
pub fn enumerate_census(j: usize, allow_large: bool) -> Result<MapCensus, MapsError> {
    if j == 0 {
        return Err(MapsError::EmptyGraph);
    }
    let cap = if allow_large { CENSUS_HARD_CAP } else { CENSUS_CAP };
    if j > cap {
        return Err(MapsError::CapExceeded(j));
    }
    let n = 4 * j;
    let parts: Vec<(Vec<u64>, u64)> = (1..n)
        .into_par_iter()
        .map(|p| {
            let mut w = Walker::new(j);
            w.pair[0] = p as u8;
            w.pair[p] = 0;
            w.descend();
            (w.counts, w.pairings)
        })
        .collect();
    let mut counts = vec![0u64; 2 * j + 1];
    let mut pairings = 0;
    for (c, p) in parts {
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
        pairings += p;
    }
    let connected = counts.iter().sum();
    Ok(MapCensus { j, counts, connected, pairings })
}

/// `(4j−1)!!`, the number of pairings of `4j` half-edges.
pub fn pairing_count(j: usize) -> BigInt {
    (1..4 * j).step_by(2).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// Exponential-formula check: all pairings decompose into connected blocks,
/// so `Σ_k C(j−1, k−1)·c_k·t_{j−k} = t_j` with `t_j = (4j−1)!!`.
/// `connected[k−1]` must hold the connected count on `k` vertices.
pub fn connected_identity_holds(connected: &[u64]) -> bool {
    let jmax = connected.len();
    let mut t = vec![BigInt::one()];
    for j in 1..=jmax {
        let mut acc = BigInt::zero();
        for k in 1..=j {
            acc += binom(j - 1, k - 1) * BigInt::from(connected[k - 1]) * &t[j - k];
        }
        if acc != pairing_count(j) {
            return false;
        }
        t.push(acc);
    }
    true
}

fn binom(n: usize, k: usize) -> BigInt {
    let v = factorial(n) / (factorial(k) * factorial(n - k));
    v.to_integer()
}

fn pw(b: i64, e: usize) -> Q {
    Q::from_integer(BigInt::from(b).pow(e as u32))
}

/// Closed-form count `N_j(g)` for `g ≤ 3`.
pub fn closed_form_count(j: usize, g: usize) -> Result<BigInt, MapsError> {
    if j == 0 {
        return Err(MapsError::EmptyGraph);
    }
    let f = factorial;
    let jj = j as i64;
    let v: Q = match g {
        0 => pw(12, j) * f(2 * j - 1) / f(j + 2),
        1 => pw(12, j) * (pw(4, j) * f(j) * f(j) - f(2 * j)) / (q(24 * jj) * f(j)),
        2 => {
            if j == 1 {
                Q::zero()
            } else {
                let k = j - 1;
                let kk = k as i64;
                let a = pw(12, k) * f(2 * k + 2) * q(28 * kk + 37) / (q(360 * (kk + 1)) * f(k - 1));
                let b = q(13 * kk * (kk + 1)) * f(k) * pw(48, k - 1);
                a - b
            }
        }
        3 => {
            if j <= 4 {
                Q::zero()
            } else {
                let k = j - 4;
                let kk = k as i64;
                let pre = q(16) * pw(48, k) * f(k + 3) / (q(3) * f(k));
                let t1 = qr(2741, 10) * f(k + 5);
                let t2 = qr(291, 10) * q(kk) * f(k + 4);
                let t3 = qr(2741, 1260) * f(2 * k + 9) / (pw(4, k) * f(k + 4));
                let t4 = q(292 * kk) * f(2 * k + 7) / (q(315) * pw(4, k) * f(k + 3));
                pre * (t1 - t2 - t3 - t4)
            }
        }
        _ => return Err(MapsError::UnsupportedGenus(g)),
    };
    debug_assert!(v.is_integer());
    Ok(v.to_integer())
}

/// Singular-expansion constants `C_0, C_2, …, C_{2G}` in the field with `√3`,
/// from `C_0 = −4√3` and the quadratic recursion.
pub fn c2g_constants(genus: usize) -> Vec<QuadExt> {
    let s3 = QuadExt::sqrt_d(3);
    let mut c = vec![s3.scale(&q(-4))];
    // 1/(2³·√3) = √3/24 and 1/(2⁸·3^{7/2}) = √3/(2⁸·3⁴)
    let a = s3.scale(&qr(1, 24));
    let b = s3.scale(&qr(1, 256 * 81));
    for g in 1..=genus {
        let mut sum = QuadExt::from_int(0, 3);
        for l in 1..g {
            sum = &sum + &(&c[g - l] * &c[l]);
        }
        let gg = g as i64;
        let lin = c[g - 1].scale(&q((5 * gg - 6) * (5 * gg - 4)));
        let next = &(&a * &sum) + &(&b * &lin);
        c.push(next);
    }
    c
}

/// `K_g`: a rational number, possibly divided by `√π`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KConstant {
    pub coeff: Q,
    pub over_sqrt_pi: bool,
}

impl KConstant {
    pub fn to_f64(&self) -> f64 {
        let c = self.coeff.to_f64().unwrap_or(f64::NAN);
        if self.over_sqrt_pi {
            c / std::f64::consts::PI.sqrt()
        } else {
            c
        }
    }
}

impl fmt::Display for KConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.over_sqrt_pi {
            let (n, d) = (self.coeff.numer(), self.coeff.denom());
            if d.is_one() {
                write!(f, "{n}/sqrt(pi)")
            } else {
                write!(f, "{n}/({d}*sqrt(pi))")
            }
        } else {
            write!(f, "{}", fmt_rational(&self.coeff))
        }
    }
}

/// Growth constant `K_g` of `N_j(g) ~ K_g·48^j·j!·j^{(5g−7)/2}`.
pub fn kg_constant(g: usize) -> KConstant {
    match g {
        0 => return KConstant { coeff: qr(1, 2), over_sqrt_pi: true },
        1 => return KConstant { coeff: qr(1, 24), over_sqrt_pi: false },
        _ => {}
    }
    let c = c2g_constants(g).pop().unwrap();
    let f = factorial;
    if g % 2 == 1 {
        let half = (5 * g - 1) / 2;
        let v = c.scale(&(pw(12, half) / (f((5 * g - 5) / 2) * q(5 * g as i64 - 3))));
        assert!(v.is_rational());
        KConstant { coeff: v.a, over_sqrt_pi: false }
    } else {
        // 12^{(5g−1)/2} = 12^{(5g−2)/2}·2√3
        let root = QuadExt::sqrt_d(3).scale(&(q(2) * pw(12, (5 * g - 2) / 2)));
        let rest = pw(2, 5 * g - 4) * f((5 * g - 4) / 2) / f(5 * g - 3);
        let v = (&root * &c).scale(&rest);
        assert!(v.is_rational());
        KConstant { coeff: v.a, over_sqrt_pi: true }
    }
}

/// `N_j(g) / (K_g·48^j·j!·j^{(5g−7)/2})` from the closed-form counts.
pub fn asymptotic_ratio(j: usize, g: usize) -> Result<f64, MapsError> {
    let n = closed_form_count(j, g)?;
    let scaled = Q::new(n, BigInt::from(48).pow(j as u32)) / factorial(j);
    let s = scaled.to_f64().unwrap_or(f64::NAN);
    let k = kg_constant(g).to_f64();
    Ok(s / (k * (j as f64).powf((5.0 * g as f64 - 7.0) / 2.0)))
}

/// Coefficients `a_0 … a_K` of the Painlevé-I asymptotic series, in the
/// field with `√6`.
pub fn painleve_a(k_max: usize) -> Vec<QuadExt> {
    // 1/(8√6) = √6/48
    let inv = QuadExt::sqrt_d(6).scale(&qr(1, 48));
    let mut a = vec![QuadExt::from_int(1, 6)];
    for k in 0..k_max {
        let kk = k as i64;
        let mut sum = QuadExt::from_int(0, 6);
        for m in 1..=k {
            sum = &sum + &(&a[m] * &a[k + 1 - m]);
        }
        let next = &(&inv * &a[k]).scale(&q(25 * kk * kk - 1)) - &sum.scale(&qr(1, 2));
        a.push(next);
    }
    a
}

/// `C_{2k}` reconstructed numerically from the Painlevé-I coefficient `a_k`
/// through the rescaling `C_{2k} = −2^{8/5}3^{2/5}(c/6)^{1/2}c^{−5k/2}a_k`
/// with `c = 2^{9/5}3^{6/5}`.
pub fn c2g_from_painleve(k: usize, a_k: &QuadExt) -> f64 {
    let c = 2f64.powf(1.8) * 3f64.powf(1.2);
    -2f64.powf(1.6) * 3f64.powf(0.4) * (c / 6.0).sqrt() * c.powf(-2.5 * k as f64) * a_k.to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_cycles_within_vertex() {
        assert_eq!(rot(0), 1);
        assert_eq!(rot(3), 0);
        assert_eq!(rot(7), 4);
    }

    #[test]
    fn census_one_and_two_vertices() {
        let c1 = enumerate_census(1, false).unwrap();
        assert_eq!(&c1.counts[..2], &[2, 1]);
        assert_eq!(c1.connected, 3);
        let c2 = enumerate_census(2, false).unwrap();
        assert_eq!(&c2.counts[..3], &[36, 60, 0]);
        assert_eq!(c2.connected, 96);
        assert_eq!(c2.pairings, 105);
    }

    #[test]
    fn census_three_vertices() {
        let c = enumerate_census(3, false).unwrap();
        assert_eq!(&c.counts[..4], &[1728, 6336, 1440, 0]);
        assert_eq!(c.connected, 9504);
        assert_eq!(c.pairings, 10395);
    }

    #[test]
    fn caps() {
        assert_eq!(enumerate_census(7, true), Err(MapsError::CapExceeded(7)));
        assert_eq!(enumerate_census(6, false), Err(MapsError::CapExceeded(6)));
        assert_eq!(closed_form_count(3, 4), Err(MapsError::UnsupportedGenus(4)));
    }

    #[test]
    fn closed_forms() {
        assert_eq!(closed_form_count(1, 0).unwrap(), BigInt::from(2));
        assert_eq!(closed_form_count(2, 0).unwrap(), BigInt::from(36));
        assert_eq!(closed_form_count(2, 2).unwrap(), BigInt::from(0));
        let row: Vec<BigInt> = (0..4).map(|g| closed_form_count(4, g).unwrap()).collect();
        assert_eq!(row, [145152, 964224, 770688, 0].map(BigInt::from));
        assert_eq!(closed_form_count(5, 3).unwrap(), BigInt::from(58060800));
    }

    #[test]
    fn constants() {
        let c = c2g_constants(3);
        assert_eq!(c[0], QuadExt::new(Q::zero(), q(-4), 3));
        assert_eq!(c[1], QuadExt::rational(qr(1, 1728), 3));
        assert_eq!(c[2].to_string(), "49*sqrt(3)/71663616");
        // 5²7²/(2²¹3¹⁰)
        assert_eq!(c[3], QuadExt::rational(Q::new(BigInt::from(25 * 49), BigInt::from(2u64.pow(21) * 3u64.pow(10))), 3));
    }

    #[test]
    fn k_constants() {
        assert_eq!(kg_constant(2), KConstant { coeff: qr(7, 1080), over_sqrt_pi: true });
        assert_eq!(kg_constant(3), KConstant { coeff: qr(245, 995328), over_sqrt_pi: false });
        assert_eq!(kg_constant(1).to_string(), "1/24");
        assert_eq!(kg_constant(2).to_string(), "7/(1080*sqrt(pi))");
    }

    #[test]
    fn painleve_first_terms() {
        let a = painleve_a(2);
        assert_eq!(a[0], QuadExt::from_int(1, 6));
        assert_eq!(a[1], QuadExt::new(Q::zero(), qr(-1, 48), 6));
    }

    #[test]
    fn exponential_formula() {
        assert!(connected_identity_holds(&[3, 96, 9504]));
        assert!(!connected_identity_holds(&[3, 95]));
    }
}
