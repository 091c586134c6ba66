//! η-functions, the g-function and the equilibrium density for each regime.
//!
//! The closed forms evaluate their square roots as products of principal
//! roots `√(1 − e²/z²)`, whose cuts are straight segments `[−e, e]`. The
//! true cuts are the traced support arcs; [`Lands`] reconciles the two by
//! counting crossings along a ray to infinity, where both branches agree.

use std::f64::consts::PI;

use crate::endpoints::{
    lagrange_constant, one_cut, one_cut_ell_star, three_cut, two_cut, EndpointError, ThreeCutEndpoints,
};
use crate::model::{potential, PhaseRegime, SigmaPoint, C64};
use crate::numeric::{adaptive, align, dist_to_polyline, segments_cross};
use crate::quaddiff::{build_qd, three_cut_qd, trace, QdError, QuadraticDifferential, Terminal, TraceOptions, TrajectoryKind};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GError {
    #[error("{0} lies on a cut")]
    OnCut(C64),
    #[error("{0} is not on the traced support")]
    NotOnSupport(C64),
    #[error("integration path to {0} would cross the cut")]
    PathCrossesCut(C64),
    #[error("regime {0} has no g-function")]
    NoRegime(String),
    #[error(transparent)]
    Endpoints(#[from] EndpointError),
    #[error(transparent)]
    Trace(#[from] QdError),
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EtaValue {
    #[serde(serialize_with = "crate::quaddiff::ser_c64")]
    pub value: C64,
    pub branch_path: String,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DensitySample {
    #[serde(serialize_with = "crate::quaddiff::ser_c64")]
    pub point: C64,
    /// Density against arclength; real and nonnegative on the support.
    #[serde(serialize_with = "crate::quaddiff::ser_c64")]
    pub density: C64,
}

const ONE: C64 = C64::new(1.0, 0.0);

fn unit_sqrt(e: C64, z: C64) -> C64 {
    (ONE - e * e / (z * z)).sqrt()
}

fn near_segment(z: C64, a: C64, b: C64) -> bool {
    crate::numeric::dist_to_segment(z, a, b) <= 1e-14 * (1.0 + a.norm().max(b.norm()))
}

/// On the radial ray from `-e` outward (including `-e`).
fn near_left_ray(z: C64, e: C64) -> bool {
    let t = z / (-e);
    t.re >= 1.0 - 1e-14 && t.im.abs() <= 1e-14 * t.re.abs().max(1.0)
}

/// `η₁(z) = (z/8)(b1² + 4z0² − 2z²)·√(z²−b1²) + 2 log((z + √(z²−b1²))/b1)`.
pub fn eta1(z: C64, sigma: SigmaPoint) -> Result<EtaValue, GError> {
    let e = one_cut(sigma, 1.0)?;
    let b = e.b1;
    if near_segment(z, -b, b) || near_left_ray(z, b) {
        return Err(GError::OnCut(z));
    }
    let s = unit_sqrt(b, z);
    let sq = z * s;
    let value = z / 8.0 * (b * b + 4.0 * e.z0 * e.z0 - 2.0 * z * z) * sq + 2.0 * (z * (ONE + s) / b).ln();
    Ok(EtaValue { value, branch_path: "closed form; √(z²−b1²) = z·√(1−b1²/z²), log cut on the ray from −b1".into() })
}

/// The same function written with `4σ` in place of `−4z0² − 2b1²`.
pub fn eta1_alt(z: C64, sigma: SigmaPoint) -> Result<EtaValue, GError> {
    let e = one_cut(sigma, 1.0)?;
    let b = e.b1;
    if near_segment(z, -b, b) || near_left_ray(z, b) {
        return Err(GError::OnCut(z));
    }
    let s = unit_sqrt(b, z);
    let value = -z / 8.0 * (b * b + 4.0 * sigma.c() + 2.0 * z * z) * (z * s) + 2.0 * (z * (ONE + s) / b).ln();
    Ok(EtaValue { value, branch_path: "closed form with σ eliminated through the endpoint equations".into() })
}

/// `η₂(z) = −(ζ/4)√(ζ²−4) + log((ζ + √(ζ²−4))/2)` with `ζ = z² + σ`.
pub fn eta2(z: C64, sigma: SigmaPoint) -> Result<EtaValue, GError> {
    let zeta = z * z + sigma.c();
    let t = (ONE - 4.0 / (zeta * zeta)).sqrt();
    if !t.is_finite() {
        return Err(GError::OnCut(z));
    }
    let ends = two_cut(sigma)?;
    if near_segment(z, ends.a2, ends.b2) || near_segment(z, -ends.b2, -ends.a2) {
        return Err(GError::OnCut(z));
    }
    let value = -zeta * zeta * t / 4.0 + (zeta * (ONE + t) / 2.0).ln();
    Ok(EtaValue { value, branch_path: "closed form in ζ = z²+σ; √(ζ²−4) = ζ·√(1−4/ζ²)".into() })
}

/// `√R(s) = s³·Π√(1 − e²/s²)` over the three-cut endpoints.
fn sqrt_r3(s: C64, ep: &ThreeCutEndpoints) -> C64 {
    s * s * s * unit_sqrt(ep.a3, s) * unit_sqrt(ep.b3, s) * unit_sqrt(ep.c3, s)
}

/// Coefficients `d_k` of `√R(z) = z³ Σ d_k z^{−2k}`.
fn far_series(ep: &ThreeCutEndpoints, n: usize) -> Vec<C64> {
    let (a, b, c) = (ep.a3 * ep.a3, ep.b3 * ep.b3, ep.c3 * ep.c3);
    let p = [ONE, -(a + b + c), a * b + b * c + a * c, -(a * b * c)];
    let mut d = vec![C64::new(0.0, 0.0); n];
    d[0] = ONE;
    for k in 1..n {
        let mut acc = if k < 4 { p[k] } else { C64::new(0.0, 0.0) };
        for i in 1..k {
            acc -= d[i] * d[k - i];
        }
        d[k] = acc / 2.0;
    }
    d
}

struct ThreeCutFrame {
    rho: f64,
    start: C64,
    radial: C64,
    series: Vec<C64>,
}

fn frame(ep: &ThreeCutEndpoints) -> ThreeCutFrame {
    let rmax = ep.a3.norm().max(ep.b3.norm()).max(ep.c3.norm());
    let rho = 2.0 * rmax + 1.0;
    let start = C64::from_polar(rho, ep.c3.arg());
    // ∫ from c3 radially out to the circle |s| = ρ
    let radial = segment_integral(ep.c3, start, ep);
    ThreeCutFrame { rho, start, radial, series: far_series(ep, 60) }
}

/// `∫_p^q √R ds` on a straight segment, cosine-substituted at both ends.
fn segment_integral(p: C64, q: C64, ep: &ThreeCutEndpoints) -> C64 {
    let mid = (p + q) / 2.0;
    let half = (q - p) / 2.0;
    let mut f = |th: f64| sqrt_r3(mid - half * th.cos(), ep) * half * th.sin();
    adaptive(&mut f, 0.0, PI, 1e-13)
}

fn arc_integral(rho: f64, phi0: f64, phi1: f64, ep: &ThreeCutEndpoints) -> C64 {
    let mut f = |phi: f64| {
        let s = C64::from_polar(rho, phi);
        sqrt_r3(s, ep) * s * C64::new(0.0, 1.0)
    };
    adaptive(&mut f, phi0, phi1, 1e-13)
}

/// `P(z) = z⁴/4 + σz²/2 − 2 log z` plus the convergent tail, i.e. the
/// antiderivative of `√R` for `|z| > ρ`, with `log z` continued from
/// `arg c3` by `dphi`.
fn far_antiderivative(z: C64, sigma: C64, fr: &ThreeCutFrame, log_z: C64) -> C64 {
    let z2 = z * z;
    let mut acc = z2 * z2 / 4.0 + sigma * z2 / 2.0 - 2.0 * log_z;
    let inv = ONE / z2;
    let mut pw = inv;
    for k in 3..fr.series.len() {
        let term = fr.series[k] * pw / (4.0 - 2.0 * k as f64);
        acc += term;
        if term.norm() < 1e-18 * acc.norm().max(1.0) {
            break;
        }
        pw *= inv;
    }
    acc
}

fn continued_log(z: C64, base: C64) -> (C64, f64) {
    let dphi = (z / base).arg();
    (C64::new(z.norm().ln(), base.arg() + dphi), dphi)
}

/// `η₃(z) = −∫_{c3}^{z} √R(s) ds` along: `c3` radially out to `|s| = ρ`,
/// the arc to `arg z` not crossing the ray from `−c3`, then radially in.
pub fn eta3(z: C64, sigma: SigmaPoint, ep: &ThreeCutEndpoints) -> Result<EtaValue, GError> {
    if near_left_ray(z, ep.c3) {
        return Err(GError::PathCrossesCut(z));
    }
    let fr = frame(ep);
    let (value, desc) = eta3_with(z, sigma.c(), ep, &fr);
    Ok(EtaValue { value, branch_path: desc })
}

fn eta3_with(z: C64, sigma: C64, ep: &ThreeCutEndpoints, fr: &ThreeCutFrame) -> (C64, String) {
    if (z - ep.c3).norm() < 1e-15 {
        return (C64::new(0.0, 0.0), "base point".into());
    }
    let (_, dphi) = continued_log(z, fr.start);
    if z.norm() > fr.rho {
        let base_log = C64::new(fr.rho.ln(), fr.start.arg());
        let (log_z, _) = continued_log(z, fr.start);
        let v = fr.radial + far_antiderivative(z, sigma, fr, log_z) - far_antiderivative(fr.start, sigma, fr, base_log);
        return (-v, format!("c3 → |s|={:.3} radially, then far-field series", fr.rho));
    }
    let phi0 = fr.start.arg();
    let on_circle = C64::from_polar(fr.rho, phi0 + dphi);
    let v = fr.radial + arc_integral(fr.rho, phi0, phi0 + dphi, ep) + segment_integral(on_circle, z, ep);
    (-v, format!("c3 → |s|={:.3} radially, arc of {:.4} rad, radially to z", fr.rho, dphi))
}

/// `ℓ*` for three cuts: the constant making `g(z) − log z → 0`.
pub fn three_cut_ell_star(sigma: SigmaPoint, ep: &ThreeCutEndpoints) -> C64 {
    let fr = frame(ep);
    let base_log = C64::new(fr.rho.ln(), fr.start.arg());
    fr.radial - far_antiderivative(fr.start, sigma.c(), &fr, base_log)
}

/// `g(z) = (V(z) + ℓ* + η(z))/2`, written so that `g − log z` stays
/// accurate for large `|z|`.
pub fn g_value(z: C64, sigma: SigmaPoint, regime: PhaseRegime) -> Result<C64, GError> {
    let s = sigma.c();
    match regime {
        PhaseRegime::OneCut => {
            let e = one_cut(sigma, 1.0)?;
            let b = e.b1;
            if near_segment(z, -b, b) || near_left_ray(z, b) {
                return Err(GError::OnCut(z));
            }
            let ell = one_cut_ell_star(sigma)?;
            let sr = unit_sqrt(b, z);
            let c = -4.0 * s - b * b;
            let v_eta = -(b * b / 8.0) * (c - b * b / (ONE + sr)) / (ONE + sr) + 2.0 * (z * (ONE + sr) / b).ln();
            Ok((v_eta + ell) / 2.0)
        }
        PhaseRegime::TwoCut => {
            let ends = two_cut(sigma)?;
            if near_segment(z, ends.a2, ends.b2) || near_segment(z, -ends.b2, -ends.a2) || near_left_ray(z, ends.b2) {
                return Err(GError::OnCut(z));
            }
            let zeta = z * z + s;
            let t = (ONE - 4.0 / (zeta * zeta)).sqrt();
            let v_eta = -s * s / 4.0 + ONE / (ONE + t) + 2.0 * z.ln() + (zeta * (ONE + t) / (2.0 * z * z)).ln();
            Ok((v_eta + s * s / 4.0 - 0.5) / 2.0)
        }
        PhaseRegime::ThreeCut => {
            let ep = three_cut(sigma, None)?;
            three_cut_g(z, sigma, &ep)
        }
        r => Err(GError::NoRegime(r.to_string())),
    }
}

/// Three-cut `g` from solved endpoints.
pub fn three_cut_g(z: C64, sigma: SigmaPoint, ep: &ThreeCutEndpoints) -> Result<C64, GError> {
    if near_left_ray(z, ep.c3) {
        return Err(GError::PathCrossesCut(z));
    }
    let fr = frame(ep);
    let s = sigma.c();
    if z.norm() > fr.rho {
        // g = log z + (1/2)·Σ_{k≥3} d_k z^{4−2k}/(2k−4)
        let (log_z, _) = continued_log(z, fr.start);
        let inv = ONE / (z * z);
        let mut pw = inv;
        let mut tail = C64::new(0.0, 0.0);
        for k in 3..fr.series.len() {
            let term = fr.series[k] * pw / (2.0 * k as f64 - 4.0);
            tail += term;
            if term.norm() < 1e-18 {
                break;
            }
            pw *= inv;
        }
        return Ok(log_z + tail / 2.0);
    }
    let ell = three_cut_ell_star(sigma, ep);
    let (eta, _) = eta3_with(z, s, ep, &fr);
    Ok((potential(z, sigma) + ell + eta) / 2.0)
}

#[derive(Clone, Debug)]
enum Curve {
    One { b: C64, z0: C64 },
    Two { a: C64, b: C64 },
    Three { ep: ThreeCutEndpoints },
}

/// Stable and unstable lands of a regime, together with its traced support.
#[derive(Clone, Debug)]
pub struct Lands {
    pub sigma: SigmaPoint,
    pub regime: PhaseRegime,
    curve: Curve,
    /// Support arcs, oriented along the contour from `−∞`.
    pub support: Vec<Vec<C64>>,
    straight: Vec<(C64, C64)>,
    pub ell_star: C64,
    pub qd: QuadraticDifferential,
    scale: f64,
}

impl Lands {
    pub fn new(sigma: SigmaPoint, regime: PhaseRegime) -> Result<Self, QdError> {
        match regime {
            PhaseRegime::ThreeCut => {
                let ep = three_cut(sigma, None)?;
                Lands::three_cut(sigma, &ep)
            }
            _ => {
                let qd = build_qd(sigma, regime)?;
                let (curve, arcs) = match regime {
                    PhaseRegime::OneCut => {
                        let e = one_cut(sigma, 1.0)?;
                        (Curve::One { b: e.b1, z0: e.z0 }, vec![(1usize, 0usize)])
                    }
                    PhaseRegime::TwoCut => {
                        let e = two_cut(sigma)?;
                        (Curve::Two { a: e.a2, b: e.b2 }, vec![(1, 3), (2, 0)])
                    }
                    r => return Err(QdError::NoRegime(r.to_string())),
                };
                let ell = lagrange_constant(sigma, regime)?.ell_star;
                Lands::assemble(sigma, regime, curve, qd, &arcs, ell)
            }
        }
    }

    /// Lands for already solved three-cut endpoints.
    pub fn three_cut(sigma: SigmaPoint, ep: &ThreeCutEndpoints) -> Result<Self, QdError> {
        let qd = three_cut_qd(ep);
        let ell = three_cut_ell_star(sigma, ep);
        // critical order: c, −c, b, −b, a, −a
        Lands::assemble(sigma, PhaseRegime::ThreeCut, Curve::Three { ep: *ep }, qd, &[(1, 3), (5, 4), (2, 0)], ell)
    }

    fn assemble(
        sigma: SigmaPoint,
        regime: PhaseRegime,
        curve: Curve,
        qd: QuadraticDifferential,
        arcs: &[(usize, usize)],
        ell_star: C64,
    ) -> Result<Self, QdError> {
        let opts = TraceOptions::default();
        let mut support = Vec::new();
        for &(from, to) in arcs {
            let mut found = None;
            for k in 0..3 {
                let t = trace(&qd, from, k, TrajectoryKind::Critical, &opts)?;
                if t.terminal == (Terminal::HitsCriticalPoint { index: to }) {
                    found = Some(t.samples);
                    break;
                }
            }
            match found {
                Some(s) => support.push(s),
                None => {
                    return Err(QdError::NoRegime(format!(
                        "{regime}: no short trajectory joins {} and {}",
                        qd.critical[from].z, qd.critical[to].z
                    )))
                }
            }
        }
        let simple: Vec<C64> = match &curve {
            Curve::One { b, .. } => vec![*b],
            Curve::Two { a, b } => vec![*a, *b],
            Curve::Three { ep } => vec![ep.a3, ep.b3, ep.c3],
        };
        let straight = simple.iter().map(|&e| (-e, e)).collect();
        let scale = qd.scale();
        Ok(Lands { sigma, regime, curve, support, straight, ell_star, qd, scale })
    }

    /// `√Q` with straight-segment cuts, `~ z³` at infinity.
    fn sqrt_q_straight(&self, z: C64) -> C64 {
        match &self.curve {
            Curve::One { b, z0 } => (z * z - z0 * z0) * z * unit_sqrt(*b, z),
            Curve::Two { a, b } => z * z * z * unit_sqrt(*a, z) * unit_sqrt(*b, z),
            Curve::Three { ep } => sqrt_r3(z, ep),
        }
    }

    /// Real part of `η` continued with the straight-cut root.
    fn re_eta_straight(&self, z: C64) -> f64 {
        let s = self.sigma.c();
        match &self.curve {
            Curve::One { b, z0 } => {
                let r = unit_sqrt(*b, z);
                let sq = z * r;
                (z / 8.0 * (b * b + 4.0 * z0 * z0 - 2.0 * z * z) * sq + 2.0 * (z * (ONE + r) / b).ln()).re
            }
            Curve::Two { a, b } => {
                let zeta = z * z + s;
                let sq = z * z * unit_sqrt(*a, z) * unit_sqrt(*b, z);
                (-zeta * sq / 4.0 + ((zeta + sq) / 2.0).ln()).re
            }
            Curve::Three { ep } => {
                let fr = frame(ep);
                let dphi = (z / fr.start).arg();
                let v = if z.norm() > fr.rho {
                    let base_log = C64::new(fr.rho.ln(), fr.start.arg());
                    let (log_z, _) = continued_log(z, fr.start);
                    fr.radial + far_antiderivative(z, s, &fr, log_z) - far_antiderivative(fr.start, s, &fr, base_log)
                } else {
                    let phi0 = fr.start.arg();
                    let on_circle = C64::from_polar(fr.rho, phi0 + dphi);
                    fr.radial + arc_integral(fr.rho, phi0, phi0 + dphi, ep) + segment_integral(on_circle, z, ep)
                };
                -v.re
            }
        }
    }

    /// Parity of crossings between a ray from `z` to infinity and all cuts
    /// of either branch.
    fn flips(&self, z: C64) -> bool {
        let far = 1e3 * self.scale.max(1.0);
        let vertices: Vec<C64> = self
            .support
            .iter()
            .flatten()
            .copied()
            .chain(self.straight.iter().flat_map(|&(p, q)| [p, q]))
            .collect();
        let mut alpha: f64 = 1.234_567;
        for _ in 0..16 {
            let d = C64::from_polar(1.0, alpha);
            let end = z + d * far;
            // no vertex may sit (angularly) on the ray, however close to z
            let clean = vertices.iter().all(|&v| {
                let w = (v - z) * d.conj();
                w.re <= 0.0 || w.im.abs() > 1e-7 * w.norm()
            });
            if clean {
                let mut n = 0usize;
                for &(p, q) in &self.straight {
                    n += segments_cross(z, end, p, q) as usize;
                }
                for arc in &self.support {
                    n += arc.windows(2).filter(|w| segments_cross(z, end, w[0], w[1])).count();
                }
                return n % 2 == 1;
            }
            alpha += 0.7;
        }
        false
    }

    /// `Re η(z)` on the sheet whose cuts are the support arcs.
    pub fn re_eta(&self, z: C64) -> f64 {
        let v = self.re_eta_straight(z);
        if self.flips(z) {
            -v
        } else {
            v
        }
    }

    /// Distance from `z` to the traced support.
    pub fn support_distance(&self, z: C64) -> f64 {
        self.support.iter().map(|a| dist_to_polyline(z, a)).fold(f64::INFINITY, f64::min)
    }

    /// `−1` on stable lands, `+1` on unstable ones.
    pub fn sign(&self, z: C64) -> Result<i8, QdError> {
        let v = self.re_eta(z);
        if v.abs() < 1e-12 * self.scale.powi(4) || self.support_distance(z) < 1e-9 * self.scale {
            return Err(QdError::OnGraph(z));
        }
        Ok(if v < 0.0 { -1 } else { 1 })
    }

    /// `√Q₊` at a support point with unit tangent `t`: the root on the left
    /// of the oriented support.
    fn sqrt_q_plus(&self, s: C64, t: C64) -> C64 {
        let z = s + C64::new(0.0, 1.0) * t * (1e-12 * self.scale);
        let v = self.sqrt_q_straight(z);
        if self.flips(z) {
            -v
        } else {
            v
        }
    }

    /// Unit tangent to the support at `s`, exact from `√Q` and oriented like `chord`.
    fn support_tangent(&self, s: C64, chord: C64) -> C64 {
        let r = self.sqrt_q_straight(s);
        if r.norm() == 0.0 || !r.is_finite() {
            return chord;
        }
        align(C64::new(0.0, 1.0) * r.conj() / r.norm(), chord)
    }

    /// Density samples at every traced support point.
    pub fn density_samples(&self) -> Vec<DensitySample> {
        let mut out = Vec::new();
        for arc in &self.support {
            for (i, &s) in arc.iter().enumerate() {
                // the arc ends are zeros of Q
                if i == 0 || i + 1 == arc.len() {
                    out.push(DensitySample { point: s, density: C64::new(0.0, 0.0) });
                    continue;
                }
                let t = self.support_tangent(s, tangent(arc, i));
                let d = self.sqrt_q_plus(s, t) * t / (2.0 * PI * C64::new(0.0, 1.0));
                out.push(DensitySample { point: s, density: d });
            }
        }
        out
    }

    /// `∫ dν` over the traced support, continuing `√Q₊` along each chord.
    pub fn mass(&self) -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for arc in &self.support {
            let plus: Vec<C64> = (0..arc.len()).map(|i| self.sqrt_q_plus(arc[i], tangent(arc, i))).collect();
            for i in 0..arc.len() - 1 {
                let (p, q) = (arc[i], arc[i + 1]);
                let reference = if plus[i].norm() >= plus[i + 1].norm() { plus[i] } else { plus[i + 1] };
                let mid = (p + q) / 2.0;
                let half = (q - p) / 2.0;
                let mut f = |th: f64| {
                    let s = mid - half * th.cos();
                    align(self.sqrt_q_straight(s), reference) * half * th.sin()
                };
                total += crate::numeric::gl(&mut f, 0.0, PI, 20);
            }
        }
        total / (2.0 * PI * C64::new(0.0, 1.0))
    }

    /// `g` evaluated with this regime's conventions.
    pub fn g(&self, z: C64) -> Result<C64, GError> {
        match &self.curve {
            Curve::Three { ep } => three_cut_g(z, self.sigma, ep),
            _ => g_value(z, self.sigma, self.regime),
        }
    }

    /// `max |Re(g₊ + g₋ − V − ℓ*)|` over interior support samples.
    pub fn variational_residual(&self) -> Result<f64, GError> {
        let mut worst: f64 = 0.0;
        for arc in &self.support {
            for i in 1..arc.len() - 1 {
                let s = arc[i];
                let n = C64::new(0.0, 1.0) * tangent(arc, i) * (1e-12 * self.scale);
                let gp = self.g(s + n)?;
                let gm = self.g(s - n)?;
                let r = (gp + gm - potential(s, self.sigma) - self.ell_star).re;
                worst = worst.max(r.abs());
            }
        }
        Ok(worst)
    }
}

fn tangent(arc: &[C64], i: usize) -> C64 {
    let d = if i == 0 {
        arc[1] - arc[0]
    } else if i + 1 == arc.len() {
        arc[i] - arc[i - 1]
    } else {
        arc[i + 1] - arc[i - 1]
    };
    d / d.norm()
}

/// Equilibrium density at a point of the traced support.
pub fn density(s: C64, sigma: SigmaPoint, regime: PhaseRegime) -> Result<DensitySample, GError> {
    let lands = Lands::new(sigma, regime)?;
    let mut best = (f64::INFINITY, C64::new(1.0, 0.0));
    for arc in &lands.support {
        for w in arc.windows(2) {
            let d = crate::numeric::dist_to_segment(s, w[0], w[1]);
            if d < best.0 {
                best = (d, (w[1] - w[0]) / (w[1] - w[0]).norm());
            }
        }
    }
    if best.0 > 1e-3 * lands.scale {
        return Err(GError::NotOnSupport(s));
    }
    let t = lands.support_tangent(s, best.1);
    let d = lands.sqrt_q_plus(s, t) * t / (2.0 * PI * C64::new(0.0, 1.0));
    Ok(DensitySample { point: s, density: d })
}
