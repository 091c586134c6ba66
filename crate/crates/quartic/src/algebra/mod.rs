//! Exact arithmetic: rationals, quadratic fields, bivariate polynomials, the
//! field element `(p + q·w)/D` with `w² = R`, and truncated power series.

mod field;
mod poly;
mod quadext;
mod series;

pub use field::{FieldElement, Side, SingularTerm};
pub use poly::Poly2;
pub use quadext::QuadExt;
pub use series::RationalSeries;

use num_bigint::BigInt;
use num_traits::One;

/// Arbitrary-precision rational number.
pub type Q = num_rational::BigRational;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("division by the zero element")]
    DivisionByZeroElement,
    #[error("series has a pole at the expansion point")]
    SeriesPole,
    #[error("unexpected structure: {0}")]
    UnexpectedStructure(String),
}

/// Integer as a rational.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// The rational `n/d`.
pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `"p/q"`, or `"p"` for integers.
pub fn fmt_rational(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (d != BigInt::from(0)).then(|| Q::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn small_q() -> impl Strategy<Value = Q> {
        (-9i64..=9, 1i64..=5).prop_map(|(n, d)| qr(n, d))
    }

    fn poly() -> impl Strategy<Value = Poly2> {
        prop::collection::vec((small_q(), 0u32..3, 0u32..3), 1..4).prop_map(|ts| {
            ts.into_iter().fold(Poly2::zero(), |acc, (c, ex, ey)| &acc + &Poly2::monomial(c, ex, ey))
        })
    }

    fn element() -> impl Strategy<Value = FieldElement> {
        (poly(), poly(), 0u32..2, 0u32..2, 0u32..2)
            .prop_map(|(p, qq, ex, ey, m)| FieldElement::new(Side::U, p, qq, ex, ey, m))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn associativity(a in element(), b in element(), c in element()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        }

        #[test]
        fn distributivity(a in element(), b in element(), c in element()) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn product_rule(a in element(), b in element()) {
            let lhs = (&a * &b).dx();
            let rhs = &(&a.dx() * &b) + &(&a * &b.dx());
            prop_assert_eq!(lhs, rhs);
            let lhs = (&a * &b).dy();
            let rhs = &(&a.dy() * &b) + &(&a * &b.dy());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn inverse_of_monomial_times_w_power(c in small_q(), ex in 0u32..3, ey in 0u32..3, odd in any::<bool>()) {
            prop_assume!(c != q(0));
            let base = FieldElement::from_poly(Side::U, Poly2::monomial(c, ex, ey));
            let a = if odd { &base * &FieldElement::w(Side::U) } else { base };
            prop_assert_eq!(&a * &a.inv().unwrap(), FieldElement::one(Side::U));
        }

        #[test]
        fn series_commutes_with_du(a in element()) {
            // only elements regular at u = 0 have Taylor series there
            if let Ok(s) = a.expand_at_zero(&q(1), 8) {
                let ds = a.dy().expand_at_zero(&q(1), 7).unwrap();
                prop_assert_eq!(ds, s.derivative());
            }
        }
    }
}
