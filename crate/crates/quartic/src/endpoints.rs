//! Endpoint equations for the one-, two- and three-cut equilibrium measures,
//! and the Euler–Lagrange constants `ℓ*`.

use crate::model::{BranchConvention, PhaseRegime, SigmaPoint, C64};
use crate::numeric::{align, segment_sqrt_integral};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EndpointError {
    #[error("σ = {0} lies on a branch cut")]
    OnBranchCut(C64),
    #[error("two-cut endpoints degenerate at σ = {0}")]
    DegenerateEndpoint(C64),
    #[error("three-cut solve did not converge (residual {:.3e})", best.residual)]
    NoConvergence { best: ThreeCutEndpoints },
    #[error("no continuation seed available: {0}")]
    BadSeed(String),
    #[error("regime {0} has no endpoint system")]
    NoEndpointSystem(String),
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct OneCutEndpoints {
    pub b1: C64,
    pub z0: C64,
    pub kappa: f64,
}

impl OneCutEndpoints {
    /// `[b1² + 2z0² + 2σ, b1²(b1² − 4z0²) − 16ϰ]`.
    pub fn residuals(&self, sigma: C64) -> [C64; 2] {
        let (b2, z2) = (self.b1 * self.b1, self.z0 * self.z0);
        [b2 + 2.0 * z2 + 2.0 * sigma, b2 * (b2 - 4.0 * z2) - 16.0 * self.kappa]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TwoCutEndpoints {
    pub a2: C64,
    pub b2: C64,
}

impl TwoCutEndpoints {
    /// `[a2² + b2² + 2σ, (a2² − b2²)² − 16]`.
    pub fn residuals(&self, sigma: C64) -> [C64; 2] {
        let (a, b) = (self.a2 * self.a2, self.b2 * self.b2);
        [a + b + 2.0 * sigma, (a - b) * (a - b) - 16.0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ThreeCutEndpoints {
    pub a3: C64,
    pub b3: C64,
    pub c3: C64,
    /// Largest absolute entry of `residuals`.
    pub residual: f64,
    /// Real and imaginary parts of the two algebraic equations, then the
    /// real parts of the two gap integrals.
    pub residuals: [f64; 6],
}

impl ThreeCutEndpoints {
    /// `[a²+b²+c²+2σ, a⁴+b⁴+c⁴−2a²b²−2b²c²−2a²c²−16]`.
    pub fn algebraic_residuals(&self, sigma: C64) -> [C64; 2] {
        let (a, b, c) = (self.a3 * self.a3, self.b3 * self.b3, self.c3 * self.c3);
        [
            a + b + c + 2.0 * sigma,
            a * a + b * b + c * c - 2.0 * (a * b + b * c + a * c) - 16.0,
        ]
    }

    /// The six branch points `±a3, ±b3, ±c3`.
    pub fn roots(&self) -> [C64; 6] {
        [self.a3, -self.a3, self.b3, -self.b3, self.c3, -self.c3]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct LagrangeConstant {
    pub ell_star: C64,
    pub ell: f64,
}

impl LagrangeConstant {
    pub fn new(ell_star: C64) -> Self {
        LagrangeConstant { ell_star, ell: -ell_star.re / 2.0 }
    }
}

/// One-cut endpoint `b1` and double zero `z0`.
pub fn one_cut(sigma: SigmaPoint, kappa: f64) -> Result<OneCutEndpoints, EndpointError> {
    let s = sigma.c();
    if BranchConvention::on_cut(s) {
        return Err(EndpointError::OnBranchCut(s));
    }
    let r = BranchConvention::sqrt_12k_plus_sigma2(s, kappa);
    let b1 = ((2.0 / 3.0) * (r - s)).sqrt();
    let z0 = BranchConvention::sqrt_arg_0_2pi((-2.0 * s - r) / 3.0);
    Ok(OneCutEndpoints { b1, z0, kappa })
}

/// Two-cut endpoints `a2 = √(−2−σ)`, `b2 = √(2−σ)`.
pub fn two_cut(sigma: SigmaPoint) -> Result<TwoCutEndpoints, EndpointError> {
    let s = sigma.c();
    if s == C64::new(2.0, 0.0) || s == C64::new(-2.0, 0.0) {
        return Err(EndpointError::DegenerateEndpoint(s));
    }
    // negating keeps the sign of zero, so real σ is evaluated from above
    let a2 = C64::new(-2.0 - s.re, -s.im).sqrt();
    let b2 = C64::new(2.0 - s.re, -s.im).sqrt();
    Ok(TwoCutEndpoints { a2, b2 })
}

/// `Φ(σ)`; used here only to find the two-cut boundary for seeding.
fn phi_re(s: C64) -> f64 {
    let t = s * (C64::new(1.0, 0.0) - 4.0 / (s * s)).sqrt();
    (-s * t / 4.0 + ((s + t) / 2.0).ln()).re
}

const GAP_TOL: f64 = 1e-14;

#[derive(Clone, Copy)]
struct State {
    abc: [C64; 3],
    mids: [C64; 2],
}

fn matched_root(x: C64, prev: C64) -> C64 {
    align(x.sqrt(), prev)
}

/// Endpoints from `A = a²` by the algebraic equations, ordered to follow
/// `prev`, and the two real gap residuals.
fn gap_residuals(area: C64, sigma: C64, prev: &State) -> ([f64; 2], State, [C64; 2]) {
    let d = (16.0 - 4.0 * sigma * area - 3.0 * area * area).sqrt();
    let mut bb = ((-2.0 * sigma - area) - d) / 2.0;
    let mut cc = ((-2.0 * sigma - area) + d) / 2.0;
    let (pb, pc) = (prev.abc[1] * prev.abc[1], prev.abc[2] * prev.abc[2]);
    if (bb - pb).norm() + (cc - pc).norm() > (cc - pb).norm() + (bb - pc).norm() {
        std::mem::swap(&mut bb, &mut cc);
    }
    let a = matched_root(area, prev.abc[0]);
    let b = matched_root(bb, prev.abc[1]);
    let c = matched_root(cc, prev.abc[2]);
    let (i1, m1) = segment_sqrt_integral(a, b, &[-a, -b, c, -c], GAP_TOL);
    let (i2, m2) = segment_sqrt_integral(b, c, &[-a, -b, -c, a], GAP_TOL);
    let s1 = if (m1 - prev.mids[0]).norm() > (m1 + prev.mids[0]).norm() { -1.0 } else { 1.0 };
    let s2 = if (m2 - prev.mids[1]).norm() > (m2 + prev.mids[1]).norm() { -1.0 } else { 1.0 };
    let ints = [i1 * s1, i2 * s2];
    ([ints[0].re, ints[1].re], State { abc: [a, b, c], mids: [m1 * s1, m2 * s2] }, ints)
}

fn newton(mut area: C64, sigma: C64, prev: &State, tol: f64) -> (C64, State, [f64; 2]) {
    let norm = |f: &[f64; 2]| f[0].abs().max(f[1].abs());
    let (mut f, mut st, _) = gap_residuals(area, sigma, prev);
    for _ in 0..60 {
        if norm(&f) < tol {
            break;
        }
        let h = 1e-7 * area.norm().max(1e-3);
        let (f1, _, _) = gap_residuals(area + h, sigma, &st);
        let (f2, _, _) = gap_residuals(area + C64::new(0.0, h), sigma, &st);
        let j = [
            [(f1[0] - f[0]) / h, (f2[0] - f[0]) / h],
            [(f1[1] - f[1]) / h, (f2[1] - f[1]) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dy = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        let mut step = C64::new(dx, dy);
        let mut accepted = false;
        for _ in 0..30 {
            let (fn_, sn, _) = gap_residuals(area + step, sigma, &st);
            if norm(&fn_) < norm(&f) {
                area += step;
                f = fn_;
                st = sn;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted || step.norm() < 1e-15 * area.norm().max(1e-12) {
            break;
        }
    }
    (area, st, f)
}

fn package(sigma: C64, st: &State, gaps: [f64; 2]) -> ThreeCutEndpoints {
    let mut ep = ThreeCutEndpoints {
        a3: st.abc[0],
        b3: st.abc[1],
        c3: st.abc[2],
        residual: 0.0,
        residuals: [0.0; 6],
    };
    let alg = ep.algebraic_residuals(sigma);
    ep.residuals = [alg[0].re, alg[0].im, alg[1].re, alg[1].im, gaps[0], gaps[1]];
    ep.residual = ep.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    ep
}

fn initial_state(abc: [C64; 3], sigma: C64) -> State {
    let [a, b, c] = abc;
    let (_, m1) = segment_sqrt_integral(a, b, &[-a, -b, c, -c], 1e-6);
    let (_, m2) = segment_sqrt_integral(b, c, &[-a, -b, -c, a], 1e-6);
    let _ = sigma;
    State { abc, mids: [m1, m2] }
}

/// Starting state at the two-cut boundary point found by walking left along
/// `Im σ = const` until `Re Φ < 0`.
fn boundary_seed(sigma: C64) -> Result<(C64, State), EndpointError> {
    let y = sigma.im;
    let mut lo = sigma.re;
    let mut steps = 0;
    while phi_re(C64::new(lo, y)) > 0.0 {
        lo -= 0.25;
        steps += 1;
        if steps > 400 {
            return Err(EndpointError::BadSeed(format!("no two-cut boundary left of {sigma}")));
        }
    }
    let mut hi = lo + 0.25;
    if steps == 0 {
        return Err(EndpointError::BadSeed(format!("σ = {sigma} is left of the two-cut boundary")));
    }
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if phi_re(C64::new(m, y)) > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    let sb = C64::new(hi, y);
    let a2 = (-2.0 - sb).sqrt();
    let b2 = (2.0 - sb).sqrt();
    Ok((sb, initial_state([C64::new(1e-3, 0.0), a2, b2], sb)))
}

/// Three-cut endpoints by Newton's method on the two gap conditions, with
/// `b3²`, `c3²` eliminated through the algebraic equations.
///
/// Without a seed the solve continues along the horizontal line from the
/// point where `Re Φ` changes sign (the birth of the middle cut). The lower
/// half plane is handled through conjugation.
pub fn three_cut(sigma: SigmaPoint, seed: Option<ThreeCutEndpoints>) -> Result<ThreeCutEndpoints, EndpointError> {
    let s = sigma.c();
    if let Some(sd) = seed {
        let st = initial_state([sd.a3, sd.b3, sd.c3], s);
        let (_, st, f) = newton(sd.a3 * sd.a3, s, &st, 1e-14);
        return finish(s, &st, f);
    }
    if s.im == 0.0 {
        return Err(EndpointError::BadSeed("no three-cut continuation on the real axis".into()));
    }
    if s.im < 0.0 {
        return three_cut(sigma.conj(), None).map(conj_endpoints).map_err(|e| match e {
            EndpointError::NoConvergence { best } => EndpointError::NoConvergence { best: conj_endpoints(best) },
            e => e,
        });
    }
    let (sb, mut st) = boundary_seed(s)?;
    let mut area = C64::new(1e-6, 0.0);
    // steps cluster near the birth point, where the middle cut grows like a square root
    let n = 40;
    let mut f = [0.0; 2];
    for k in 1..=n {
        let t = (k as f64 / n as f64).powi(2);
        let sk = sb + (s - sb) * t;
        let out = newton(area, sk, &st, if k == n { 1e-14 } else { 1e-9 });
        area = out.0;
        st = out.1;
        f = out.2;
    }
    finish(s, &st, f)
}

fn finish(sigma: C64, st: &State, f: [f64; 2]) -> Result<ThreeCutEndpoints, EndpointError> {
    let ep = package(sigma, st, f);
    if ep.residual < 1e-10 && ep.residual.is_finite() {
        Ok(ep)
    } else {
        Err(EndpointError::NoConvergence { best: ep })
    }
}

fn conj_endpoints(e: ThreeCutEndpoints) -> ThreeCutEndpoints {
    let mut r = e;
    r.a3 = e.a3.conj();
    r.b3 = e.b3.conj();
    r.c3 = e.c3.conj();
    r.residuals[1] = -e.residuals[1];
    r.residuals[3] = -e.residuals[3];
    r
}

/// `ℓ*` for the given regime. Boundary points use the formula of the region
/// whose endpoints stay analytic across them: the one-cut closed form on
/// γ1–γ4 and at the anchors, the two-cut one on γ5, γ6.
pub fn lagrange_constant(sigma: SigmaPoint, regime: PhaseRegime) -> Result<LagrangeConstant, EndpointError> {
    use crate::model::Gamma;
    let s = sigma.c();
    let ell = match regime {
        PhaseRegime::OneCut
        | PhaseRegime::MultiCritical(_)
        | PhaseRegime::Boundary(Gamma::G1 | Gamma::G2 | Gamma::G3 | Gamma::G4) => one_cut_ell_star(sigma)?,
        PhaseRegime::TwoCut | PhaseRegime::Boundary(Gamma::G5 | Gamma::G6) => s * s / 4.0 - 0.5,
        PhaseRegime::ThreeCut => {
            let ep = three_cut(sigma, None)?;
            crate::gfunction::three_cut_ell_star(sigma, &ep)
        }
    };
    Ok(LagrangeConstant::new(ell))
}

/// `(σ² − σ√(12+σ²))/12 + log(−σ + √(12+σ²)) − 1/2 − log 6`.
pub fn one_cut_ell_star(sigma: SigmaPoint) -> Result<C64, EndpointError> {
    let s = sigma.c();
    if BranchConvention::on_cut(s) {
        return Err(EndpointError::OnBranchCut(s));
    }
    let r = BranchConvention::sqrt_12k_plus_sigma2(s, 1.0);
    Ok((s * s - s * r) / 12.0 + (r - s).ln() - 0.5 - 6f64.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sp(re: f64, im: f64) -> SigmaPoint {
        SigmaPoint::new(re, im).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn one_cut_at_minus_two() {
        let e = one_cut(sp(-2.0, 0.0), 1.0).unwrap();
        assert!(close(e.b1, C64::new(2.0, 0.0), 1e-15));
        assert!(e.z0.norm() < 1e-7);
    }

    #[test]
    fn one_cut_at_zero() {
        let e = one_cut(sp(0.0, 0.0), 1.0).unwrap();
        let b1 = 2.0 * 3f64.powf(-0.25);
        let z0 = (12f64.sqrt() / 3.0).sqrt();
        assert!(close(e.b1, C64::new(b1, 0.0), 1e-14));
        assert!(close(e.z0, C64::new(0.0, z0), 1e-14));
        assert!((b1 - 1.51967).abs() < 1e-5 && (z0 - 1.07457).abs() < 1e-5);
    }

    #[test]
    fn one_cut_real_signs() {
        for x in [-1.9, -1.0, 0.5, 1.0, 4.0, 30.0] {
            let e = one_cut(sp(x, 0.0), 1.0).unwrap();
            assert!(e.b1.re > 0.0 && e.b1.im == 0.0);
            assert!(e.z0.im > 0.0 && e.z0.re.abs() < 1e-15);
            for r in e.residuals(C64::new(x, 0.0)) {
                assert!(r.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn one_cut_rejects_cut() {
        assert!(matches!(one_cut(sp(-3.0, 0.0), 1.0), Err(EndpointError::OnBranchCut(_))));
    }

    #[test]
    fn one_cut_scales_with_kappa() {
        let s = C64::new(0.7, -0.4);
        let e = one_cut(SigmaPoint::from_c(s).unwrap(), 2.5).unwrap();
        for r in e.residuals(s) {
            assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn two_cut_examples() {
        let e = two_cut(sp(-3.0, 0.0)).unwrap();
        assert!(close(e.a2, C64::new(1.0, 0.0), 1e-15));
        assert!(close(e.b2, C64::new(5f64.sqrt(), 0.0), 1e-15));
        let e = two_cut(sp(-2.0 - 1e-14, 0.0)).unwrap();
        assert!(e.a2.norm() < 1e-6 && close(e.b2, C64::new(2.0, 0.0), 1e-12));
        let e = two_cut(sp(-3.0, 1.0)).unwrap();
        for r in e.residuals(C64::new(-3.0, 1.0)) {
            assert!(r.norm() < 1e-12);
        }
        assert!(two_cut(sp(2.0, 0.0)).is_err());
        assert!(two_cut(sp(-2.0, 0.0)).is_err());
    }

    #[test]
    fn one_and_two_cut_meet_at_minus_two() {
        let one = one_cut(sp(-2.0, 0.0), 1.0).unwrap();
        let two = two_cut(sp(-2.0 - 1e-12, 0.0)).unwrap();
        assert!(close(one.b1, two.b2, 1e-12));
    }

    #[test]
    fn lagrange_closed_forms() {
        let l = lagrange_constant(sp(-3.0, 0.0), PhaseRegime::TwoCut).unwrap();
        assert!(close(l.ell_star, C64::new(1.75, 0.0), 1e-15));
        assert_eq!(l.ell, -l.ell_star.re / 2.0);
        let l = lagrange_constant(sp(-2.0, 0.0), PhaseRegime::OneCut).unwrap();
        assert!(close(l.ell_star, C64::new(0.5, 0.0), 1e-14));
    }

    #[test]
    fn three_cut_examples() {
        for (re, im) in [(-1.0, 2.0), (-3.0, 2.0)] {
            let s = C64::new(re, im);
            let e = three_cut(sp(re, im), None).unwrap();
            assert!(e.residual < 1e-10, "{e:?}");
            for r in e.algebraic_residuals(s) {
                assert!(r.norm() < 1e-10);
            }
            let lower = three_cut(sp(re, -im), None).unwrap();
            assert!(close(lower.a3, e.a3.conj(), 1e-9));
            assert!(close(lower.c3, e.c3.conj(), 1e-9));
        }
        let near = three_cut(sp(-3.0, 2.0), None).unwrap();
        let far = three_cut(sp(-1.0, 2.0), None).unwrap();
        assert!(near.a3.norm() < far.a3.norm());
    }

    #[test]
    fn three_cut_birth_degenerates() {
        // just right of the birth point on Im σ = 2 the middle cut is tiny
        let y = 2.0;
        let mut lo = -6.0;
        let mut hi = -2.0;
        for _ in 0..80 {
            let m = 0.5 * (lo + hi);
            if phi_re(C64::new(m, y)) > 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        let e = three_cut(sp(hi + 1e-6, y), None).unwrap();
        assert!(e.a3.norm() < 1e-2, "{e:?}");
    }

    #[test]
    fn three_cut_with_seed_reconverges() {
        let e = three_cut(sp(-1.0, 2.0), None).unwrap();
        let e2 = three_cut(sp(-1.02, 2.01), Some(e)).unwrap();
        assert!(e2.residual < 1e-10);
        assert!((e2.c3 - e.c3).norm() < 0.1);
    }

    #[test]
    fn three_cut_rejects_real_axis() {
        assert!(matches!(three_cut(sp(-3.0, 0.0), None), Err(EndpointError::BadSeed(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn one_cut_identities(re in -6.0f64..6.0, im in -6.0f64..6.0) {
            let s = C64::new(re, im);
            prop_assume!(!BranchConvention::on_cut(s));
            let e = one_cut(sp(re, im), 1.0).unwrap();
            for r in e.residuals(s) {
                prop_assert!(r.norm() < 1e-12 * (1.0 + s.norm_sqr()));
            }
        }

        #[test]
        fn two_cut_identities(re in -8.0f64..-2.1, im in -4.0f64..4.0) {
            let s = C64::new(re, im);
            let e = two_cut(sp(re, im)).unwrap();
            for r in e.residuals(s) {
                prop_assert!(r.norm() < 1e-12 * (1.0 + s.norm()));
            }
        }
    }
}
