use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{AlgebraError, Q};

/// Truncated power series `c_0 + c_1 t + … + c_J t^J` with exact rational
/// coefficients. Binary operations keep the smaller of the two orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSeries {
    coeffs: Vec<Q>,
}

impl RationalSeries {
    /// Series with the given coefficients; the order is `coeffs.len() - 1`.
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Q::zero());
        }
        RationalSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        RationalSeries { coeffs: vec![Q::zero(); order + 1] }
    }

    pub fn constant(c: Q, order: usize) -> Self {
        let mut s = RationalSeries::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// Polynomial coefficients truncated (or zero-padded) to `order`.
    pub fn from_poly(p: &[Q], order: usize) -> Self {
        let mut s = RationalSeries::zero(order);
        for (i, c) in p.iter().enumerate().take(order + 1) {
            s.coeffs[i] = c.clone();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        RationalSeries::from_poly(&self.coeffs, order.min(self.order()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, s: &Q) -> Self {
        RationalSeries { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn inv(&self) -> Result<Self, AlgebraError> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(AlgebraError::SeriesPole);
        }
        let n = self.order();
        let mut out = vec![Q::zero(); n + 1];
        out[0] = c0.recip();
        for k in 1..=n {
            let mut acc = Q::zero();
            for i in 1..=k {
                acc += &self.coeffs[i] * &out[k - i];
            }
            out[k] = -acc / c0;
        }
        Ok(RationalSeries { coeffs: out })
    }

    /// Square root of a series whose constant term is one.
    pub fn sqrt_unit(&self) -> Result<Self, AlgebraError> {
        if !self.coeffs[0].is_one() {
            return Err(AlgebraError::UnexpectedStructure("square root needs unit constant term".into()));
        }
        let n = self.order();
        let mut out = vec![Q::zero(); n + 1];
        out[0] = Q::one();
        let two = Q::from_integer(BigInt::from(2));
        for k in 1..=n {
            let mut acc = self.coeffs[k].clone();
            for i in 1..k {
                acc -= &out[i] * &out[k - i];
            }
            out[k] = acc / &two;
        }
        Ok(RationalSeries { coeffs: out })
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = RationalSeries::constant(Q::one(), self.order());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Termwise derivative; the order drops by one.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return RationalSeries::zero(0);
        }
        let c = (1..self.coeffs.len())
            .map(|k| &self.coeffs[k] * Q::from_integer(BigInt::from(k)))
            .collect();
        RationalSeries { coeffs: c }
    }

    /// Termwise antiderivative vanishing at zero; the order rises by one.
    pub fn integral(&self) -> Self {
        let mut c = vec![Q::zero()];
        for (k, a) in self.coeffs.iter().enumerate() {
            c.push(a / Q::from_integer(BigInt::from(k + 1)));
        }
        RationalSeries { coeffs: c }
    }

    /// Multiply by `t^k` keeping the order.
    pub fn mul_t(&self, k: usize) -> Self {
        let n = self.order();
        let mut out = RationalSeries::zero(n);
        for i in 0..=n {
            if i + k <= n {
                out.coeffs[i + k] = self.coeffs[i].clone();
            }
        }
        out
    }

    /// Divide by `t^k`; fails unless the first `k` coefficients vanish.
    pub fn div_t(&self, k: usize) -> Result<Self, AlgebraError> {
        if k > self.order() || self.coeffs[..k].iter().any(|c| !c.is_zero()) {
            return Err(AlgebraError::SeriesPole);
        }
        Ok(RationalSeries { coeffs: self.coeffs[k..].to_vec() })
    }
}

impl Add for &RationalSeries {
    type Output = RationalSeries;
    fn add(self, o: &RationalSeries) -> RationalSeries {
        let n = self.order().min(o.order());
        RationalSeries { coeffs: (0..=n).map(|k| &self.coeffs[k] + &o.coeffs[k]).collect() }
    }
}

impl Sub for &RationalSeries {
    type Output = RationalSeries;
    fn sub(self, o: &RationalSeries) -> RationalSeries {
        let n = self.order().min(o.order());
        RationalSeries { coeffs: (0..=n).map(|k| &self.coeffs[k] - &o.coeffs[k]).collect() }
    }
}

impl Mul for &RationalSeries {
    type Output = RationalSeries;
    fn mul(self, o: &RationalSeries) -> RationalSeries {
        let n = self.order().min(o.order());
        let mut out = vec![Q::zero(); n + 1];
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(n - i) {
                out[i + j] += &self.coeffs[i] * &o.coeffs[j];
            }
        }
        RationalSeries { coeffs: out }
    }
}

impl Neg for &RationalSeries {
    type Output = RationalSeries;
    fn neg(self) -> RationalSeries {
        RationalSeries { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }
}
