//! Quadrature and branch helpers shared by the numeric modules.

use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::model::C64;

fn rule(n: usize) -> &'static [(f64, f64)] {
    static R10: OnceLock<GaussLegendre> = OnceLock::new();
    static R20: OnceLock<GaussLegendre> = OnceLock::new();
    let cell = if n <= 10 { &R10 } else { &R20 };
    let deg = if n <= 10 { 10 } else { 20 };
    cell.get_or_init(|| GaussLegendre::new(deg).expect("degree at least two"))
        .as_node_weight_pairs()
}

/// Fixed-order Gauss–Legendre on `[a, b]` for a complex integrand.
pub(crate) fn gl<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64, n: usize) -> C64 {
    gl_with_mass(f, a, b, n).0
}

/// The rule's value together with `Σ w·|f|`, the scale of its roundoff.
fn gl_with_mass<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64, n: usize) -> (C64, f64) {
    let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
    let mut acc = C64::new(0.0, 0.0);
    let mut mass = 0.0;
    for &(x, w) in rule(n) {
        let v = f(m + h * x) * w;
        acc += v;
        mass += v.norm();
    }
    (acc * h, mass * h.abs())
}

/// Adaptive Gauss–Legendre: bisect until the 20-point rule agrees with the
/// sum over both halves to `tol` (absolute, scaled by interval share), or
/// until the disagreement is at roundoff level.
pub(crate) fn adaptive<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64, tol: f64) -> C64 {
    fn rec<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64, whole: C64, tol: f64, depth: u32) -> C64 {
        let m = 0.5 * (a + b);
        let (left, lm) = gl_with_mass(f, a, m, 20);
        let (right, rm) = gl_with_mass(f, m, b, 20);
        let split = left + right;
        let diff = (split - whole).norm();
        if diff <= tol || diff <= 1e-14 * (lm + rm) || depth >= 40 {
            return split;
        }
        rec(f, a, m, left, 0.5 * tol, depth + 1) + rec(f, m, b, right, 0.5 * tol, depth + 1)
    }
    let whole = gl(f, a, b, 20);
    rec(f, a, b, whole, tol, 0)
}

/// Square root whose branch cut is the ray `{t·dir : t > 0}` from the origin.
pub(crate) fn sqrt_cut(z: C64, dir: C64) -> C64 {
    let m = -dir / dir.norm();
    m.sqrt() * (z / m).sqrt()
}

/// Direction for the cut of `√(s − o)` that keeps it off the segment `[a, b]`.
pub(crate) fn away_from_segment(o: C64, a: C64, b: C64) -> C64 {
    let d = (b - a) / (b - a).norm();
    let u = (o - a) / (b - a);
    if u.im.abs() > 1e-12 {
        d * C64::new(0.0, u.im.signum())
    } else if u.re <= 0.5 {
        -d
    } else {
        d
    }
}

/// `∫_a^b √((s−a)(s−b)·Π(s−o)) ds` along the straight segment, with every
/// factor's cut pointing away from the segment so the integrand is
/// continuous on it. Also returns the integrand's square-root value at the
/// midpoint so callers can fix the overall sign by continuity.
pub(crate) fn segment_sqrt_integral(a: C64, b: C64, others: &[C64], tol: f64) -> (C64, C64) {
    let dirs: Vec<C64> = others.iter().map(|&o| away_from_segment(o, a, b)).collect();
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    let rest = |s: C64| -> C64 {
        others.iter().zip(&dirs).map(|(&o, &d)| sqrt_cut(s - o, d)).product()
    };
    let mut f = |th: f64| -> C64 {
        let s = mid - half * th.cos();
        C64::new(0.0, 1.0) * half * half * th.sin().powi(2) * rest(s)
    };
    let val = adaptive(&mut f, 0.0, std::f64::consts::PI, tol);
    let mid_root = C64::new(0.0, 1.0) * half * rest(mid);
    (val, mid_root)
}

/// Flip `v` to whichever sign is closer to `reference`.
pub(crate) fn align(v: C64, reference: C64) -> C64 {
    if (v - reference).norm() > (v + reference).norm() {
        -v
    } else {
        v
    }
}

/// Intersection test for the half-open segments `[p, q)` and `[r, s)`.
pub(crate) fn segments_cross(p: C64, q: C64, r: C64, s: C64) -> bool {
    let cross = |u: C64, v: C64| u.re * v.im - u.im * v.re;
    let d1 = cross(q - p, r - p);
    let d2 = cross(q - p, s - p);
    let d3 = cross(s - r, p - r);
    let d4 = cross(s - r, q - r);
    ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0))
}

/// Distance from `z` to the segment `[p, q]`.
pub(crate) fn dist_to_segment(z: C64, p: C64, q: C64) -> f64 {
    let d = q - p;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (z - p).norm();
    }
    let t = (((z - p) * d.conj()).re / l2).clamp(0.0, 1.0);
    (z - (p + d * t)).norm()
}

/// Distance from `z` to a polyline.
pub(crate) fn dist_to_polyline(z: C64, pts: &[C64]) -> f64 {
    match pts.len() {
        0 => f64::INFINITY,
        1 => (z - pts[0]).norm(),
        _ => pts.windows(2).map(|w| dist_to_segment(z, w[0], w[1])).fold(f64::INFINITY, f64::min),
    }
}
