use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use super::Q;

/// Sparse bivariate polynomial in `x` (the coupling ϰ) and `y` (u or σ)
/// with rational coefficients.
///
/// Terms are keyed by `(deg_y, deg_x)` so that the last entry of the map is
/// the leading term in lexicographic order with `y > x`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Q>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn constant(c: Q) -> Self {
        Poly2::monomial(c, 0, 0)
    }

    pub fn one() -> Self {
        Poly2::constant(Q::one())
    }

    /// `c · x^ex · y^ey`
    pub fn monomial(c: Q, ex: u32, ey: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((ey, ex), c);
        }
        Poly2 { terms }
    }

    pub fn x() -> Self {
        Poly2::monomial(Q::one(), 1, 0)
    }

    pub fn y() -> Self {
        Poly2::monomial(Q::one(), 0, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterator over `(ex, ey, coefficient)`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, &Q)> {
        self.terms.iter().map(|(&(ey, ex), c)| (ex, ey, c))
    }

    pub fn coeff(&self, ex: u32, ey: u32) -> Q {
        self.terms.get(&(ey, ex)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn deg_x(&self) -> u32 {
        self.iter().map(|(ex, _, _)| ex).max().unwrap_or(0)
    }

    pub fn deg_y(&self) -> u32 {
        self.iter().map(|(_, ey, _)| ey).max().unwrap_or(0)
    }

    fn add_term(&mut self, ex: u32, ey: u32, c: Q) {
        if c.is_zero() {
            return;
        }
        let key = (ey, ex);
        let remove = match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                v.is_zero()
            }
            None => {
                self.terms.insert(key, c);
                false
            }
        };
        if remove {
            self.terms.remove(&key);
        }
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return Poly2::zero();
        }
        Poly2 { terms: self.terms.iter().map(|(k, v)| (*k, v * s)).collect() }
    }

    /// Multiply by `x^ex · y^ey`.
    pub fn shift(&self, ex: u32, ey: u32) -> Self {
        Poly2 { terms: self.terms.iter().map(|(&(a, b), v)| ((a + ey, b + ex), v.clone())).collect() }
    }

    /// Smallest `x` and `y` exponents present (zero polynomial gives `(0,0)`).
    pub fn min_exponents(&self) -> (u32, u32) {
        if self.is_zero() {
            return (0, 0);
        }
        let mx = self.iter().map(|t| t.0).min().unwrap();
        let my = self.iter().map(|t| t.1).min().unwrap();
        (mx, my)
    }

    /// Divide by `x^ex · y^ey`; the caller guarantees divisibility.
    pub fn unshift(&self, ex: u32, ey: u32) -> Self {
        Poly2 { terms: self.terms.iter().map(|(&(a, b), v)| ((a - ey, b - ex), v.clone())).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Poly2::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn dx(&self) -> Self {
        let mut out = Poly2::zero();
        for (ex, ey, c) in self.iter() {
            if ex > 0 {
                out.add_term(ex - 1, ey, c * Q::from_integer(BigInt::from(ex)));
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let mut out = Poly2::zero();
        for (ex, ey, c) in self.iter() {
            if ey > 0 {
                out.add_term(ex, ey - 1, c * Q::from_integer(BigInt::from(ey)));
            }
        }
        out
    }

    /// Substitute `x = x0`, returning coefficients of the polynomial in `y`.
    pub fn subs_x(&self, x0: &Q) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.deg_y() as usize + 1];
        for (ex, ey, c) in self.iter() {
            out[ey as usize] += c * pow_q(x0, ex);
        }
        out
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.iter()
            .map(|(ex, ey, c)| c.to_f64().unwrap_or(f64::NAN) * x.powu(ex) * y.powu(ey))
            .sum()
    }

    pub fn eval_q(&self, x: &Q, y: &Q) -> Q {
        self.iter().map(|(ex, ey, c)| c * pow_q(x, ex) * pow_q(y, ey)).sum()
    }

    fn leading(&self) -> Option<(u32, u32, &Q)> {
        self.terms.iter().next_back().map(|(&(ey, ex), c)| (ex, ey, c))
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    ///
    /// A single polynomial is a Gröbner basis of the ideal it generates, so the
    /// division algorithm leaves a zero remainder exactly when `d | self`.
    pub fn div_exact(&self, d: &Poly2) -> Option<Poly2> {
        let (dx, dy, dc) = d.leading()?;
        let dc = dc.clone();
        let mut rem = self.clone();
        let mut quot = Poly2::zero();
        while let Some((ex, ey, c)) = rem.leading() {
            if ex < dx || ey < dy {
                return None;
            }
            let f = c / &dc;
            let t = Poly2::monomial(f, ex - dx, ey - dy);
            rem = &rem - &(&t * d);
            quot = &quot + &t;
        }
        Some(quot)
    }
}

pub(crate) fn pow_q(x: &Q, n: u32) -> Q {
    let mut out = Q::one();
    for _ in 0..n {
        out *= x;
    }
    out
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, o: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (ex, ey, c) in o.iter() {
            out.add_term(ex, ey, c.clone());
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, o: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (ex, ey, c) in o.iter() {
            out.add_term(ex, ey, -c.clone());
        }
        out
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, o: &Poly2) -> Poly2 {
        let mut acc: BTreeMap<(u32, u32), Q> = BTreeMap::new();
        for (&(ay, ax), ca) in &self.terms {
            for (&(by, bx), cb) in &o.terms {
                *acc.entry((ay + by, ax + bx)).or_insert_with(Q::zero) += ca * cb;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Poly2 { terms: acc }
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        Poly2 { terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect() }
    }
}
