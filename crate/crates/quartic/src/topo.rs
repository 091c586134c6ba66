//! String-equation recursions for the recurrence coefficients, their genus
//! expansion, and the free-energy series derived from them.
//!
//! Two sides are supported. The u-side works with `w² = 1 + 12ϰu` and the
//! σ-side with `s² = 12ϰ + σ²`; both keep ϰ symbolic so that the shifts
//! `n ± 1 ↔ ϰ ± 1/N` can be expanded by exact ϰ-derivatives.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::algebra::{q, AlgebraError, FieldElement, QuadExt, RationalSeries, Side, Q};

/// Hard upper bound on the genus accepted by the recursions.
pub const GENUS_HARD_CAP: usize = 10;
/// Default genus cap.
pub const DEFAULT_GENUS: usize = 8;
/// Default series truncation order.
pub const DEFAULT_ORDER: usize = 64;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TopoError {
    #[error("genus {0} exceeds the cap {GENUS_HARD_CAP}")]
    CapExceeded(usize),
    #[error("degenerate denominator in the recursion")]
    DegenerateDenominator,
    #[error("unexpected structure: {0}")]
    UnexpectedStructure(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// ϰ-derivatives of a family of field elements, computed on demand.
#[derive(Clone, Debug)]
struct Derivatives {
    table: Vec<Vec<FieldElement>>,
}

impl Derivatives {
    fn new() -> Self {
        Derivatives { table: Vec::new() }
    }

    fn push(&mut self, e: FieldElement) {
        self.table.push(vec![e]);
    }

    /// `∂ϰ^n` of element `i`.
    fn get(&mut self, i: usize, n: usize) -> FieldElement {
        while self.table[i].len() <= n {
            let next = self.table[i].last().unwrap().dx();
            self.table[i].push(next);
        }
        self.table[i][n].clone()
    }

    /// `∂ϰ^n e / n!`
    fn taylor(&mut self, i: usize, n: usize) -> FieldElement {
        self.get(i, n).scale(&factorial(n).recip())
    }
}

pub(crate) fn factorial(n: usize) -> Q {
    Q::from_integer((1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k)))
}

/// Genus coefficients `r_0, r_2, …, r_{2G}` of one side, stored as `e[g] = r_{2g}`.
#[derive(Clone, Debug)]
pub struct GenusCoeffTable {
    pub side: Side,
    pub e: Vec<FieldElement>,
    derivs: Derivatives,
}

impl GenusCoeffTable {
    pub fn genus(&self) -> usize {
        self.e.len() - 1
    }

    /// `∂ϰ^n r_{2g}`.
    pub fn derivative(&mut self, g: usize, n: usize) -> FieldElement {
        self.derivs.get(g, n)
    }

    /// Coefficient of `N^{-k}` in the expansion of `R_n`; zero for odd `k`.
    pub fn coefficient(&self, k: usize) -> FieldElement {
        if k % 2 == 1 {
            FieldElement::zero(self.side)
        } else {
            self.e[k / 2].clone()
        }
    }

    /// Numeric value of `r_{2g}` for a chosen square root `w` of the radicand.
    pub fn eval(&self, g: usize, kappa: Complex64, y: Complex64, w: Complex64) -> Complex64 {
        self.e[g].eval(kappa, y, w)
    }
}

fn check_cap(g: usize) -> Result<(), TopoError> {
    if g > GENUS_HARD_CAP {
        Err(TopoError::CapExceeded(g))
    } else {
        Ok(())
    }
}

/// u-side recursion: `r_0 = (−1+w)/(6u)` and `r_{2g} = −u·𝒜_{2g}/w`.
pub fn string_recursion_u(genus: usize) -> Result<GenusCoeffTable, TopoError> {
    check_cap(genus)?;
    let side = Side::U;
    let u = FieldElement::y(side);
    let w = FieldElement::w(side);
    let r0 = &(&w - &FieldElement::one(side)) / &u.scale(&q(6));
    let mut t = GenusCoeffTable { side, e: vec![r0.clone()], derivs: Derivatives::new() };
    t.derivs.push(r0);
    let factor = &(-&u) / &w;
    for g in 1..=genus {
        let mut a = FieldElement::zero(side);
        for l in 1..g {
            a = &a + &(&t.e[g - l] * &t.e[l]).scale(&q(3));
        }
        for l in 1..=g {
            let mut inner = FieldElement::zero(side);
            for k in 0..l {
                inner = &inner + &t.derivs.taylor(k, 2 * l - 2 * k);
            }
            a = &a + &(&t.e[g - l] * &inner).scale(&q(2));
        }
        let rg = &factor * &a;
        t.e.push(rg.clone());
        t.derivs.push(rg);
    }
    Ok(t)
}

/// σ-side recursion: `r_0 = (−σ+s)/6` and `r_{2j} = −Λ_{2j}/(σ + 6r_0)`,
/// where `σ + 6r_0 = s`.
pub fn string_recursion_sigma(genus: usize) -> Result<GenusCoeffTable, TopoError> {
    check_cap(genus)?;
    let side = Side::Sigma;
    let sigma = FieldElement::y(side);
    let s = FieldElement::w(side);
    let r0 = (&s - &sigma).scale(&Q::new(BigInt::from(1), BigInt::from(6)));
    let denom = &sigma + &r0.scale(&q(6));
    if denom.is_zero() {
        return Err(TopoError::DegenerateDenominator);
    }
    let inv = denom.inv()?;
    let mut t = GenusCoeffTable { side, e: vec![r0.clone()], derivs: Derivatives::new() };
    t.derivs.push(r0);
    for j in 1..=genus {
        let mut lam = FieldElement::zero(side);
        for l in 1..j {
            lam = &lam + &(&t.e[l] * &t.e[j - l]).scale(&q(3));
        }
        for l in 0..j {
            let mut inner = FieldElement::zero(side);
            for m in 0..(j - l) {
                inner = &inner + &t.derivs.taylor(m, 2 * j - 2 * l - 2 * m);
            }
            lam = &lam + &(&t.e[l] * &inner).scale(&q(2));
        }
        let rj = -&(&lam * &inv);
        t.e.push(rj.clone());
        t.derivs.push(rj);
    }
    Ok(t)
}

/// Shift and product coefficients built from a u-side table.
#[derive(Clone, Debug)]
pub struct ExpansionTables {
    /// `A_m`, coefficient of `N^{-m}` in `R_{n+1}`.
    pub a: Vec<FieldElement>,
    /// `B_m`, coefficient of `N^{-m}` in `R_{n−1}`.
    pub b: Vec<FieldElement>,
    /// `C_j = Σ A_{m'} B_k` over `m' + k = j`, all `j ≤ 2G`.
    pub c: Vec<FieldElement>,
    /// Energy terms `𝓔_{2g}`, coefficient of `N^{-2g}` in `𝓕'(u)`.
    pub energy: Vec<FieldElement>,
}

/// Build `A_m`, `B_m`, `C_j` and `𝓔_{2g}` for `m, j ≤ 2G`.
pub fn expansion_tables(table: &mut GenusCoeffTable) -> ExpansionTables {
    let side = table.side;
    let top = 2 * table.genus();
    let mut a = Vec::with_capacity(top + 1);
    let mut b = Vec::with_capacity(top + 1);
    for m in 0..=top {
        let mut am = FieldElement::zero(side);
        let mut bm = FieldElement::zero(side);
        for j in 0..=(m / 2) {
            let l = m - 2 * j;
            let term = table.derivs.taylor(j, l);
            am = &am + &term;
            bm = if l % 2 == 0 { &bm + &term } else { &bm - &term };
        }
        a.push(am);
        b.push(bm);
    }
    let mut c = Vec::with_capacity(top + 1);
    for j in 0..=top {
        let mut cj = FieldElement::zero(side);
        for m in 0..=j {
            cj = &cj + &(&a[m] * &b[j - m]);
        }
        c.push(cj);
    }
    let energy = energy_terms(table, &c);
    ExpansionTables { a, b, c, energy }
}

/// Even product coefficients in the reduced form
/// `C_{2k} = Σ_{m=0}^{k} A_{2m}A_{2k−2m} − Σ_{m=1}^{k} A_{2m−1}A_{2k−2m+1}`.
pub fn product_even(tables: &ExpansionTables, k: usize) -> FieldElement {
    let a = &tables.a;
    let mut out = FieldElement::zero(a[0].side());
    for m in 0..=k {
        out = &out + &(&a[2 * m] * &a[2 * k - 2 * m]);
    }
    for m in 1..=k {
        out = &out - &(&a[2 * m - 1] * &a[2 * k - 2 * m + 1]);
    }
    out
}

fn energy_terms(table: &GenusCoeffTable, c: &[FieldElement]) -> Vec<FieldElement> {
    let side = table.side;
    let u = FieldElement::y(side);
    let kappa = FieldElement::x(side);
    let r0 = &table.e[0];
    let pre = (&kappa * &kappa).scale(&q(4)).inv().expect("ϰ² is invertible");
    let base = &(r0 * r0) + &(&kappa / &u);
    let mut out = Vec::new();
    let e0 = &(&pre * &(&base * r0)) - &u.scale(&q(4)).inv().expect("u is invertible");
    out.push(e0);
    for g in 1..=table.genus() {
        let mut acc = &base * &table.e[g];
        for k in 1..=g {
            acc = &acc + &(&c[2 * k] * &table.e[g - k]);
        }
        out.push(&pre * &acc);
    }
    out
}

/// Order-by-order residual of `R_n(1 + u(R_{n−1} + R_n + R_{n+1})) − ϰ`,
/// orders `N^0 … N^{-2G}`. Every entry must vanish exactly.
pub fn string_residual(table: &GenusCoeffTable, tables: &ExpansionTables) -> Vec<FieldElement> {
    let side = table.side;
    let u = FieldElement::y(side);
    let top = 2 * table.genus();
    let mut out = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let mut acc = table.coefficient(n);
        let mut inner = FieldElement::zero(side);
        for i in (0..=n).step_by(2) {
            let j = n - i;
            let mid = &(&tables.a[j] + &tables.b[j]) + &table.coefficient(j);
            inner = &inner + &(&table.e[i / 2] * &mid);
        }
        acc = &acc + &(&u * &inner);
        if n == 0 {
            acc = &acc - &FieldElement::x(side);
        }
        out.push(acc);
    }
    out
}

/// Free-energy Taylor coefficients `𝒻^{(j)}_{2g}` at ϰ = 1, for `g ≤ G`, `1 ≤ j ≤ J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeEnergySeries {
    /// `coeffs[g][j]`; index 0 holds the vanishing constant term.
    pub coeffs: Vec<Vec<Q>>,
}

impl FreeEnergySeries {
    pub fn get(&self, g: usize, j: usize) -> Q {
        self.coeffs[g][j].clone()
    }

    /// `(−1)^j · j! · 4^j · 𝒻^{(j)}_{2g}`, the implied map count.
    pub fn implied_count(&self, g: usize, j: usize) -> Q {
        let sign = if j % 2 == 0 { Q::one() } else { -Q::one() };
        sign * factorial(j) * Q::from_integer(BigInt::from(4).pow(j as u32)) * self.get(g, j)
    }

    /// Series of `𝒻_{2g}` itself.
    pub fn series(&self, g: usize) -> RationalSeries {
        RationalSeries::new(self.coeffs[g].clone())
    }
}

/// Termwise integration of the energy series: `𝒻^{(j)}_{2g} = [u^{j−1}]𝓔_{2g} / j`.
pub fn free_energy_series(tables: &ExpansionTables, order: usize) -> Result<FreeEnergySeries, TopoError> {
    let one = q(1);
    let mut coeffs = Vec::new();
    for e in &tables.energy {
        let s = e.expand_at_zero(&one, order.saturating_sub(1))?;
        coeffs.push(s.integral().coeffs().to_vec());
    }
    Ok(FreeEnergySeries { coeffs })
}

/// Residual of `4u²𝒻″ + 6u𝒻′ (+ 1/2 for g = 0) − 𝒜^{ode}_{2g}/(2ϰ²)` at ϰ = 1
/// through `u^order`, where
/// `𝒜^{ode}_{2g} = Σ_k r_{2g−2k} Σ_ℓ r^{(2ℓ)}_{2k−2ℓ}/(2ℓ)!`.
pub fn verify_ode_identity(
    table: &mut GenusCoeffTable,
    fe: &FreeEnergySeries,
    g: usize,
    order: usize,
) -> Result<RationalSeries, TopoError> {
    let side = table.side;
    let mut src = FieldElement::zero(side);
    for k in 0..=g {
        let mut inner = FieldElement::zero(side);
        for l in 0..=k {
            inner = &inner + &table.derivs.taylor(k - l, 2 * l);
        }
        src = &src + &(&table.e[g - k] * &inner);
    }
    let kappa = FieldElement::x(side);
    let rhs = &src / &(&kappa * &kappa).scale(&q(2));
    let rhs = rhs.expand_at_zero(&q(1), order)?;
    let f = &fe.coeffs[g];
    if f.len() <= order {
        return Err(TopoError::UnexpectedStructure("free-energy series shorter than requested order".into()));
    }
    let mut lhs = vec![Q::zero(); order + 1];
    for (n, slot) in lhs.iter_mut().enumerate() {
        let nn = Q::from_integer(BigInt::from(n));
        *slot = (q(4) * &nn * &nn + q(2) * &nn) * &f[n];
    }
    if g == 0 {
        lhs[0] += Q::new(BigInt::from(1), BigInt::from(2));
    }
    Ok(&RationalSeries::new(lhs) - &rhs)
}

/// Exponent and coefficient of the leading singular term of `r_{2g}` at
/// `u = −1/12` (ϰ = 1). The exponent is returned doubled.
pub fn singular_structure(table: &GenusCoeffTable, g: usize) -> Result<(QuadExt, i64), TopoError> {
    let t = table.e[g].expand_at_singularity(&q(1))?;
    let expect = 1 - 5 * g as i64;
    if t.twice_exponent != expect {
        return Err(TopoError::UnexpectedStructure(format!(
            "exponent {}/2 where {}/2 was expected",
            t.twice_exponent, expect
        )));
    }
    Ok((t.coeff, t.twice_exponent))
}

/// Closed-form Taylor coefficients of `𝒻_{2g}` for `g ≤ 3`, the oracle for
/// the recursion pipeline.
pub fn closed_form_coefficient(g: usize, j: usize) -> Option<Q> {
    if j == 0 {
        return Some(Q::zero());
    }
    let jj = j as i64;
    let sgn = |n: usize| if n % 2 == 0 { Q::one() } else { -Q::one() };
    let pw = |b: i64, e: usize| Q::from_integer(BigInt::from(b).pow(e as u32));
    let f = factorial;
    Some(match g {
        0 => sgn(j) * pw(3, j) * f(2 * j - 1) / (f(j) * f(j + 2)),
        1 => {
            let bracket = Q::one() - f(2 * j) / (pw(4, j) * f(j) * f(j));
            Q::new(BigInt::from(1), BigInt::from(24)) * sgn(j) * pw(12, j) / q(jj) * bracket
        }
        2 => {
            if j < 3 {
                Q::zero()
            } else {
                let t1 = q(8) * f(2 * j) * q(28 * jj + 9) / (q(15) * pw(4, j) * f(j - 2) * f(j));
                let t2 = q(13 * jj * (jj - 1));
                sgn(j) * pw(12, j) / q(2304 * jj) * (t1 - t2)
            }
        }
        3 => {
            if j <= 4 {
                Q::zero()
            } else {
                let k = j - 4;
                let kk = k as i64;
                let lead = Q::new(BigInt::from(1), BigInt::from(48)) * sgn(k) * pw(12, k) / (f(k - 1) * q(kk + 4));
                let a = q(32892) / q(kk) * (f(k + 5) / f(5) - f(2 * k + 9) / (q(15120) * pw(4, k) * f(k + 4)));
                let b = q(291) * f(k + 4) / q(10);
                let c = q(292) * f(2 * k + 7) / (q(315) * pw(4, k) * f(k + 3));
                lead * (a - b - c)
            }
        }
        _ => return None,
    })
}
