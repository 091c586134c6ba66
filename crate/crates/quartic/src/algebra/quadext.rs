use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{fmt_rational, Q};

/// An element `a + b·√d` of the quadratic field obtained by adjoining `√d`.
///
/// Mixing elements with different `d` panics, except that a purely rational
/// element (`b = 0`) is accepted by any field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadExt {
    pub a: Q,
    pub b: Q,
    pub d: i64,
}

impl QuadExt {
    pub fn new(a: Q, b: Q, d: i64) -> Self {
        assert!(d > 1, "radicand must exceed one");
        QuadExt { a, b, d }
    }

    pub fn rational(a: Q, d: i64) -> Self {
        QuadExt::new(a, Q::zero(), d)
    }

    /// The element `√d` itself.
    pub fn sqrt_d(d: i64) -> Self {
        QuadExt::new(Q::zero(), Q::one(), d)
    }

    pub fn from_int(n: i64, d: i64) -> Self {
        QuadExt::rational(Q::from_integer(BigInt::from(n)), d)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        QuadExt::new(self.a.clone(), -self.b.clone(), self.d)
    }

    /// Field norm `a² − d·b²`.
    pub fn norm(&self) -> Q {
        &self.a * &self.a - &self.b * &self.b * Q::from_integer(BigInt::from(self.d))
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        let c = self.conj();
        Some(QuadExt::new(c.a / &n, c.b / n, self.d))
    }

    pub fn scale(&self, s: &Q) -> Self {
        QuadExt::new(&self.a * s, &self.b * s, self.d)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = QuadExt::from_int(1, self.d);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
            + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
    }

    fn common_d(&self, other: &Self) -> i64 {
        if self.d == other.d || other.b.is_zero() {
            self.d
        } else if self.b.is_zero() {
            other.d
        } else {
            panic!("mixing √{} and √{}", self.d, other.d)
        }
    }
}

impl fmt::Display for QuadExt {
    /// Renders as `a`, `p*sqrt(d)/q` or `a+p*sqrt(d)/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", fmt_rational(&self.a));
        }
        let mut s = String::new();
        if !self.a.is_zero() {
            s.push_str(&fmt_rational(&self.a));
            if self.b.is_positive() {
                s.push('+');
            }
        }
        let num = self.b.numer();
        let den = self.b.denom();
        if num.is_one() {
        } else if (-num).is_one() {
            s.push('-');
        } else {
            s.push_str(&format!("{num}*"));
        }
        s.push_str(&format!("sqrt({})", self.d));
        if !den.is_one() {
            s.push_str(&format!("/{den}"));
        }
        write!(f, "{s}")
    }
}

impl Add for &QuadExt {
    type Output = QuadExt;
    fn add(self, o: &QuadExt) -> QuadExt {
        QuadExt::new(&self.a + &o.a, &self.b + &o.b, self.common_d(o))
    }
}

impl Sub for &QuadExt {
    type Output = QuadExt;
    fn sub(self, o: &QuadExt) -> QuadExt {
        QuadExt::new(&self.a - &o.a, &self.b - &o.b, self.common_d(o))
    }
}

impl Mul for &QuadExt {
    type Output = QuadExt;
    fn mul(self, o: &QuadExt) -> QuadExt {
        let d = self.common_d(o);
        let dq = Q::from_integer(BigInt::from(d));
        QuadExt::new(
            &self.a * &o.a + &self.b * &o.b * dq,
            &self.a * &o.b + &self.b * &o.a,
            d,
        )
    }
}

impl Div for &QuadExt {
    type Output = QuadExt;
    fn div(self, o: &QuadExt) -> QuadExt {
        self * &o.inv().expect("division by zero in quadratic field")
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::new(-self.a.clone(), -self.b.clone(), self.d)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for QuadExt {
            type Output = QuadExt;
            fn $m(self, o: QuadExt) -> QuadExt {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);
