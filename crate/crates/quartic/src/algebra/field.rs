use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use super::poly::{pow_q, Poly2};
use super::quadext::QuadExt;
use super::series::RationalSeries;
use super::{q, AlgebraError, Q};

/// Which quadratic relation the adjoined element `w` satisfies.
///
/// `U`: `w² = 1 + 12·x·y` with `y = u`.  `Sigma`: `w² = 12·x + y²` with `y = σ`.
/// In both cases `x` is the coupling ϰ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    U,
    Sigma,
}

impl Side {
    pub fn radicand(self) -> Poly2 {
        match self {
            Side::U => &Poly2::one() + &Poly2::monomial(q(12), 1, 1),
            Side::Sigma => &Poly2::monomial(q(12), 1, 0) + &Poly2::monomial(q(1), 0, 2),
        }
    }
}

/// `(p + q·w) / (x^ex · y^ey · R^m)` where `R = w²` is the side's radicand and
/// `p`, `q` are bivariate rational polynomials.
///
/// The denominator is kept in factored monomial form. Every value that the
/// string-equation recursions produce fits this shape, and division is
/// supported whenever the divisor's norm factors the same way.
#[derive(Clone, Debug)]
pub struct FieldElement {
    side: Side,
    p: Poly2,
    q: Poly2,
    ex: u32,
    ey: u32,
    m: u32,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.side == other.side && (self - other).is_zero()
    }
}

impl FieldElement {
    pub fn new(side: Side, p: Poly2, q: Poly2, ex: u32, ey: u32, m: u32) -> Self {
        let mut e = FieldElement { side, p, q, ex, ey, m };
        e.normalize();
        e
    }

    pub fn from_poly(side: Side, p: Poly2) -> Self {
        FieldElement::new(side, p, Poly2::zero(), 0, 0, 0)
    }

    pub fn constant(side: Side, c: Q) -> Self {
        FieldElement::from_poly(side, Poly2::constant(c))
    }

    pub fn zero(side: Side) -> Self {
        FieldElement::from_poly(side, Poly2::zero())
    }

    pub fn one(side: Side) -> Self {
        FieldElement::constant(side, Q::one())
    }

    pub fn x(side: Side) -> Self {
        FieldElement::from_poly(side, Poly2::x())
    }

    pub fn y(side: Side) -> Self {
        FieldElement::from_poly(side, Poly2::y())
    }

    pub fn w(side: Side) -> Self {
        FieldElement::new(side, Poly2::zero(), Poly2::one(), 0, 0, 0)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Rational part `p`, irrational part `q`, and denominator exponents
    /// `(ex, ey, m)`.
    pub fn parts(&self) -> (&Poly2, &Poly2, (u32, u32, u32)) {
        (&self.p, &self.q, (self.ex, self.ey, self.m))
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    /// Total number of stored terms, a size measure for degree guards.
    pub fn size(&self) -> usize {
        self.p.len() + self.q.len()
    }

    pub fn max_degree(&self) -> u32 {
        self.p.deg_x().max(self.q.deg_x()).max(self.p.deg_y()).max(self.q.deg_y())
    }

    fn normalize(&mut self) {
        if self.is_zero() {
            self.ex = 0;
            self.ey = 0;
            self.m = 0;
            return;
        }
        let (px, py) = min_exps(&self.p);
        let (qx, qy) = min_exps(&self.q);
        let cx = self.ex.min(px).min(qx);
        let cy = self.ey.min(py).min(qy);
        if cx > 0 || cy > 0 {
            self.p = self.p.unshift(cx, cy);
            self.q = self.q.unshift(cx, cy);
            self.ex -= cx;
            self.ey -= cy;
        }
        let r = self.side.radicand();
        while self.m > 0 {
            let dp = self.p.div_exact(&r);
            let dq = self.q.div_exact(&r);
            match (dp, dq) {
                (Some(a), Some(b)) => {
                    self.p = a;
                    self.q = b;
                    self.m -= 1;
                }
                _ => break,
            }
        }
    }

    fn lift(&self, ex: u32, ey: u32, m: u32) -> (Poly2, Poly2) {
        let rp = self.side.radicand().pow(m - self.m);
        let f = rp.shift(ex - self.ex, ey - self.ey);
        (&self.p * &f, &self.q * &f)
    }

    pub fn scale(&self, s: &Q) -> Self {
        FieldElement::new(self.side, self.p.scale(s), self.q.scale(s), self.ex, self.ey, self.m)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = FieldElement::one(self.side);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Multiplicative inverse via the conjugate `p − q·w`.
    pub fn inv(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZeroElement);
        }
        let r = self.side.radicand();
        let mut norm = &(&self.p * &self.p) - &(&(&self.q * &self.q) * &r);
        if norm.is_zero() {
            return Err(AlgebraError::DivisionByZeroElement);
        }
        let (nx, ny) = norm.min_exponents();
        norm = norm.unshift(nx, ny);
        let mut k = 0;
        while let Some(d) = norm.div_exact(&r) {
            norm = d;
            k += 1;
        }
        if norm.len() != 1 || norm.deg_x() != 0 || norm.deg_y() != 0 {
            return Err(AlgebraError::UnexpectedStructure(
                "divisor norm is not a monomial times a radicand power".into(),
            ));
        }
        let c = norm.coeff(0, 0);
        let f = r.pow(self.m).shift(self.ex, self.ey).scale(&c.recip());
        Ok(FieldElement::new(self.side, &self.p * &f, -&(&self.q * &f), nx, ny, k))
    }

    /// Partial derivative in `x` (ϰ), using `∂w = R_x / (2w)`.
    pub fn dx(&self) -> Self {
        self.partial(true)
    }

    /// Partial derivative in `y` (u or σ).
    pub fn dy(&self) -> Self {
        self.partial(false)
    }

    fn partial(&self, in_x: bool) -> Self {
        let r = self.side.radicand();
        let (rd, pd, qd, e, var) = if in_x {
            (r.dx(), self.p.dx(), self.q.dx(), self.ex, Poly2::x())
        } else {
            (r.dy(), self.p.dy(), self.q.dy(), self.ey, Poly2::y())
        };
        let two = q(2);
        // d/dv of the numerator, over 2R.
        let np = &r * &pd.scale(&two);
        let nq = &(&r * &qd.scale(&two)) + &(&self.q * &rd);
        // log-derivative of the denominator, over v·R.
        let ld = &r.scale(&Q::from_integer(BigInt::from(e))) + &(&var * &rd).scale(&Q::from_integer(BigInt::from(self.m)));
        let p = &(&var * &np) - &(&self.p * &ld).scale(&two);
        let qq = &(&var * &nq) - &(&self.q * &ld).scale(&two);
        let half = Q::new(BigInt::from(1), BigInt::from(2));
        let (ex, ey) = if in_x { (self.ex + 1, self.ey) } else { (self.ex, self.ey + 1) };
        FieldElement::new(self.side, p.scale(&half), qq.scale(&half), ex, ey, self.m + 1)
    }

    /// Numeric value with the caller's choice of `w` (a square root of `R(x, y)`).
    pub fn eval(&self, x: Complex64, y: Complex64, w: Complex64) -> Complex64 {
        let num = self.p.eval(x, y) + self.q.eval(x, y) * w;
        let r = w * w;
        num / (x.powu(self.ex) * y.powu(self.ey) * r.powu(self.m))
    }

    /// Taylor series in `y` about `y = 0` after substituting `x = x0`.
    ///
    /// Requires `R(x0, 0) = 1`, so `w` is expanded on the branch with `w(0) = 1`.
    pub fn expand_at_zero(&self, x0: &Q, order: usize) -> Result<RationalSeries, AlgebraError> {
        if x0.is_zero() && self.ex > 0 {
            return Err(AlgebraError::SeriesPole);
        }
        let ey = self.ey as usize;
        let n = order + ey;
        let rs = RationalSeries::from_poly(&self.side.radicand().subs_x(x0), n);
        let w = rs.sqrt_unit()?;
        let num = &RationalSeries::from_poly(&self.p.subs_x(x0), n)
            + &(&RationalSeries::from_poly(&self.q.subs_x(x0), n) * &w);
        let shifted = num.div_t(ey)?;
        let rinv = rs.truncate(order).inv()?.powi(self.m);
        let xs = pow_q(x0, self.ex).recip();
        Ok((&shifted * &rinv).scale(&xs))
    }

    /// Leading behaviour at the branch point `y = −1/(12·x0)` of the u-side
    /// radicand, written in `t = y + 1/(12·x0)`.
    ///
    /// Returns the most singular term when the element blows up there;
    /// otherwise the leading non-analytic (half-integer) term, or the value
    /// itself for an element that is analytic at the point.
    pub fn expand_at_singularity(&self, x0: &Q) -> Result<SingularTerm, AlgebraError> {
        if self.side != Side::U {
            return Err(AlgebraError::UnexpectedStructure("singular expansion is defined on the u-side".into()));
        }
        if !x0.is_positive() {
            return Err(AlgebraError::UnexpectedStructure("coupling must be positive".into()));
        }
        let four_x0 = x0 * q(4);
        let rt = exact_sqrt(&four_x0).ok_or_else(|| {
            AlgebraError::UnexpectedStructure("√(12ϰ) must lie in the field with √3".into())
        })?;
        let y0 = (q(12) * x0).recip();
        let p = taylor_shift(&self.p.subs_x(x0), &-y0.clone());
        let qq = taylor_shift(&self.q.subs_x(x0), &-y0.clone());
        let m = self.m as i64;
        let k = self.m as usize + p.len().max(qq.len()) + 2;
        let lin = RationalSeries::from_poly(&[-y0.clone(), Q::one()], k);
        let v = lin.inv()?.powi(self.ey);
        let ps = &RationalSeries::from_poly(&p, k) * &v;
        let qs = &RationalSeries::from_poly(&qq, k) * &v;
        let s = (pow_q(x0, self.ex) * pow_q(&(q(12) * x0), self.m)).recip();
        let int_term = (0..=k).find(|&i| !ps.coeff(i).is_zero()).map(|i| (2 * (i as i64 - m), ps.coeff(i)));
        let half_term = (0..=k).find(|&i| !qs.coeff(i).is_zero()).map(|i| (2 * (i as i64 - m) + 1, qs.coeff(i)));
        let mk_int = |(e, c): (i64, Q)| QuadExtTerm { twice_exp: e, coeff: QuadExt::rational(c * &s, 3) };
        let mk_half = |(e, c): (i64, Q)| QuadExtTerm { twice_exp: e, coeff: QuadExt::new(Q::zero(), c * &s * &rt, 3) };
        let cand_int = int_term.map(mk_int);
        let cand_half = half_term.map(mk_half);
        let lead = match (&cand_int, &cand_half) {
            (Some(a), Some(b)) => Some(if a.twice_exp < b.twice_exp { a.clone() } else { b.clone() }),
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        };
        let lead = match lead {
            Some(l) => l,
            None => return Ok(SingularTerm { twice_exponent: 0, coeff: QuadExt::from_int(0, 3), bounded: true, analytic: true }),
        };
        if lead.twice_exp < 0 {
            return Ok(SingularTerm { twice_exponent: lead.twice_exp, coeff: lead.coeff, bounded: false, analytic: false });
        }
        match cand_half {
            Some(h) => Ok(SingularTerm { twice_exponent: h.twice_exp, coeff: h.coeff, bounded: true, analytic: false }),
            None => {
                let c0 = QuadExt::rational(if lead.twice_exp == 0 { lead.coeff.a.clone() } else { Q::zero() }, 3);
                Ok(SingularTerm { twice_exponent: 0, coeff: c0, bounded: true, analytic: true })
            }
        }
    }
}

#[derive(Clone)]
struct QuadExtTerm {
    twice_exp: i64,
    coeff: QuadExt,
}

/// One term `coeff · t^(twice_exponent/2)` of a local expansion at the branch point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularTerm {
    pub twice_exponent: i64,
    pub coeff: QuadExt,
    /// The element stays bounded as `t → 0`.
    pub bounded: bool,
    /// No half-integer powers at all: the element is analytic at the point.
    pub analytic: bool,
}

fn min_exps(p: &Poly2) -> (u32, u32) {
    if p.is_zero() {
        (u32::MAX, u32::MAX)
    } else {
        p.min_exponents()
    }
}

fn exact_sqrt(x: &Q) -> Option<Q> {
    let n = x.numer();
    let d = x.denom();
    if n.is_negative() {
        return None;
    }
    let rn = n.sqrt();
    let rd = d.sqrt();
    (&rn * &rn == *n && &rd * &rd == *d).then(|| Q::new(rn, rd))
}

/// Coefficients of `p(t + a)` given those of `p(t)`.
fn taylor_shift(p: &[Q], a: &Q) -> Vec<Q> {
    let mut out = vec![Q::zero(); p.len()];
    for c in p.iter().rev() {
        // Horner step: out = out·(t + a) + c
        let mut next = vec![Q::zero(); p.len()];
        for (i, o) in out.iter().enumerate() {
            if o.is_zero() {
                continue;
            }
            next[i] += o * a;
            if i + 1 < next.len() {
                next[i + 1] += o.clone();
            }
        }
        next[0] += c.clone();
        out = next;
    }
    out
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        assert_eq!(self.side, o.side);
        let (ex, ey, m) = (self.ex.max(o.ex), self.ey.max(o.ey), self.m.max(o.m));
        let (p1, q1) = self.lift(ex, ey, m);
        let (p2, q2) = o.lift(ex, ey, m);
        FieldElement::new(self.side, &p1 + &p2, &q1 + &q2, ex, ey, m)
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        self + &(-o)
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        assert_eq!(self.side, o.side);
        let r = self.side.radicand();
        let p = &(&self.p * &o.p) + &(&(&self.q * &o.q) * &r);
        let qq = &(&self.p * &o.q) + &(&self.q * &o.p);
        FieldElement::new(self.side, p, qq, self.ex + o.ex, self.ey + o.ey, self.m + o.m)
    }
}

impl Div for &FieldElement {
    type Output = FieldElement;
    fn div(self, o: &FieldElement) -> FieldElement {
        self * &o.inv().expect("unsupported or zero divisor")
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { side: self.side, p: -&self.p, q: -&self.q, ex: self.ex, ey: self.ey, m: self.m }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);
