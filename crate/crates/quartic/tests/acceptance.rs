//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every criterion is checked along two routes that share no numerical
//! code: the library's own computation, and an oracle written here from the
//! defining formulas (closed forms, direct quadrature, numeric substitution).

use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quartic::algebra::{fmt_rational, q, qr, QuadExt, Q};
use quartic::endpoints::{lagrange_constant, one_cut, three_cut, two_cut};
use quartic::gfunction::Lands;
use quartic::maps::{
    asymptotic_ratio, c2g_constants, closed_form_count, connected_identity_holds, enumerate_census, kg_constant,
    KConstant,
};
use quartic::model::{BranchConvention, PhaseRegime, SigmaPoint};
use quartic::phase::{boundaries, classify, CurveId};
use quartic::quaddiff::{build_qd, critical_graph};
use quartic::topo::{
    closed_form_coefficient, expansion_tables, free_energy_series, singular_structure, string_recursion_u,
    string_residual, verify_ode_identity, FreeEnergySeries,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sp(re: f64, im: f64) -> SigmaPoint {
    SigmaPoint::new(re, im).expect("finite")
}

// ---------------------------------------------------------------------------
// independent numerics

/// Composite Simpson on `[a, b]` with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> C64, a: f64, b: f64, n: usize) -> C64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += f(a + h * k as f64) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Double-exponential quadrature on `[a, b]`; the integrand receives the
/// distances `(s − a, b − s)` computed without cancellation.
fn tanh_sinh(f: impl Fn(f64, f64) -> f64, a: f64, b: f64) -> f64 {
    let len = b - a;
    let h = 1.0 / 64.0;
    let mut acc = 0.0;
    for k in -400i32..=400 {
        let t = h * k as f64;
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        let w = std::f64::consts::FRAC_PI_2 * t.cosh() / (2.0 * u.cosh().powi(2));
        let da = len / (1.0 + (-2.0 * u).exp());
        let db = len / (1.0 + (2.0 * u).exp());
        if da <= 0.0 || db <= 0.0 || !w.is_finite() || w == 0.0 {
            continue;
        }
        acc += w * f(da, db);
    }
    acc * len * h
}

/// Natural log of a positive big integer.
fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    let shift = bits.saturating_sub(60);
    let top: BigInt = n >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// `Ψ` from its defining formula with the roots `z0` and `√(z0²−b1²)`
/// continued from `prev`; returns the value and the roots used.
fn psi_continued(s: C64, prev: Option<(C64, C64)>) -> (f64, (C64, C64)) {
    // √(σ²+12) with cuts on the horizontal rays from ±i√12 to the left: the
    // principal root, negated left of the imaginary axis beyond the rays
    let mut root = (s * s + 12.0).sqrt();
    if s.re < 0.0 && s.im.abs() > 12f64.sqrt() {
        root = -root;
    }
    let b2 = (-2.0 * s + 2.0 * root) / 3.0;
    let z02 = -(b2 + 2.0 * s) / 2.0;
    let (b, mut z0, mut r) = (b2.sqrt(), z02.sqrt(), (z02 - b2).sqrt());
    if let Some((pz, pr)) = prev {
        if (z0 - pz).norm() > (z0 + pz).norm() {
            z0 = -z0;
        }
        if (r - pr).norm() > (r + pr).norm() {
            r = -r;
        }
    }
    ((-(s / 4.0) * z0 * r + 2.0 * ((z0 + r) / b).ln()).re, (z0, r))
}

/// `Re Ψ`, up to a sign that depends on the branches; its zeros do not.
fn re_psi(s: C64) -> f64 {
    psi_continued(s, None).0
}

/// Root of `Re Ψ` on the segment `line(lo)..line(hi)`, following the
/// branches continuously from `lo`.
fn psi_root(line: impl Fn(f64) -> C64, lo: f64, hi: f64) -> Result<f64, String> {
    let n = 2000;
    let mut prev = None;
    let mut last: Option<(f64, f64, (C64, C64))> = None;
    for k in 0..=n {
        let t = lo + (hi - lo) * k as f64 / n as f64;
        let (v, roots) = psi_continued(line(t), prev);
        prev = Some(roots);
        if let Some((t0, v0, roots0)) = last {
            if v0.signum() != v.signum() {
                return bisect_sign(|x| psi_continued(line(x), Some(roots0)).0, t0, t);
            }
        }
        last = Some((t, v, roots));
    }
    Err(format!("Re Ψ keeps its sign on [{lo}, {hi}]"))
}

/// `Re Φ` from its defining formula.
fn re_phi(s: C64) -> f64 {
    let r = (s * s - 4.0).sqrt();
    (-(s / 4.0) * r + ((s + r) / 2.0).ln()).re
}

fn bisect_sign(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64, String> {
    let f0 = f(lo);
    ensure(f0.signum() != f(hi).signum(), || format!("no sign change on [{lo}, {hi}]"))?;
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if f(m).signum() == f0.signum() {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn bisect_regime(f: impl Fn(f64) -> SigmaPoint, mut lo: f64, mut hi: f64) -> Result<f64, String> {
    let c = |y: f64| classify(f(y), false).map_err(|e| e.to_string());
    let r0 = c(lo)?;
    ensure(c(hi)? != r0, || format!("no regime change on [{lo}, {hi}]"))?;
    for _ in 0..40 {
        let m = 0.5 * (lo + hi);
        if c(m)? == r0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `∫_p^q √Q(s) ds` on the straight segment with the root continued along
/// it, for `Q = Π (s − r)` over `roots`, `p` and `q` among them.
fn chord_integral(p: C64, q: C64, roots: &[C64]) -> C64 {
    let others: Vec<C64> = {
        let mut v = roots.to_vec();
        for e in [p, q] {
            let k = v.iter().position(|&r| (r - e).norm() < 1e-14).expect("endpoint is a root");
            v.remove(k);
        }
        v
    };
    let (m, h) = ((p + q) / 2.0, (q - p) / 2.0);
    let n = 4000;
    let mut prev: Option<C64> = None;
    let mut vals = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let th = std::f64::consts::PI * k as f64 / n as f64;
        let s = m - h * th.cos();
        let mut root = others.iter().map(|&o| s - o).product::<C64>().sqrt();
        if let Some(pr) = prev {
            if (root - pr).norm() > (root + pr).norm() {
                root = -root;
            }
        }
        prev = Some(root);
        vals.push(C64::new(0.0, 1.0) * h * h * th.sin().powi(2) * root);
    }
    let hh = std::f64::consts::PI / n as f64;
    let mut acc = vals[0] + vals[n];
    for (k, v) in vals.iter().enumerate().take(n).skip(1) {
        acc += v * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * hh / 3.0
}

// ---------------------------------------------------------------------------
// criteria

fn ac1() -> Outcome {
    let targets: [&[u64]; 4] = [&[2, 1], &[36, 60], &[1728, 6336, 1440, 0], &[145_152, 964_224, 770_688, 0]];
    let totals = [3u64, 96, 9504, 1_880_064];
    let t = Instant::now();
    let mut connected = Vec::new();
    for j in 1..=4 {
        let c = enumerate_census(j, false).map_err(|e| e.to_string())?;
        for g in 0..=3 {
            let census = c.counts.get(g).copied().unwrap_or(0);
            let closed = closed_form_count(j, g).map_err(|e| e.to_string())?;
            let frozen = targets[j - 1].get(g).copied().unwrap_or(0);
            ensure(BigInt::from(census) == closed && census == frozen, || {
                format!("j={j} g={g}: census {census}, closed form {closed}, expected {frozen}")
            })?;
        }
        ensure(c.connected == totals[j - 1], || format!("j={j}: {} connected", c.connected))?;
        connected.push(c.connected);
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("enumeration took {secs:.1}s"))?;
    // second route: the exponential formula ties connected counts to all (4j−1)!! pairings
    ensure(connected_identity_holds(&connected), || "exponential formula fails".into())?;
    let all: Vec<u64> = (1..=4u64).map(|j| (1..=4 * j - 1).step_by(2).product()).collect();
    let c = &connected;
    let by_partitions = [
        c[0],
        c[1] + c[0].pow(2),
        c[2] + 3 * c[0] * c[1] + c[0].pow(3),
        c[3] + 4 * c[0] * c[2] + 3 * c[1].pow(2) + 6 * c[0].pow(2) * c[1] + c[0].pow(4),
    ];
    ensure(by_partitions[..] == all[..], || format!("set-partition sums {by_partitions:?} vs {all:?}"))?;
    Ok(format!("j ≤ 4 exact, totals {connected:?}, enumeration {secs:.2}s"))
}

fn ac2() -> Outcome {
    let t = Instant::now();
    let mut table = string_recursion_u(3).map_err(|e| e.to_string())?;
    let x = expansion_tables(&mut table);
    let fe = free_energy_series(&x, 16).map_err(|e| e.to_string())?;
    let frozen = [
        vec![qr(-1, 2), qr(9, 8), qr(-9, 2), qr(189, 8)],
        vec![qr(-1, 4), qr(15, 8), qr(-33, 2), qr(2511, 16)],
        vec![q(0), q(0), qr(-15, 4), qr(2007, 16)],
        vec![q(0), q(0), q(0), q(0), qr(-945, 2)],
    ];
    for g in 0..=3 {
        for j in 1..=16 {
            let got = fe.get(g, j);
            let cf = closed_form_coefficient(g, j).ok_or("closed form missing")?;
            ensure(got == cf, || format!("g={g} j={j}: {} vs closed form {}", fmt_rational(&got), fmt_rational(&cf)))?;
            // second route: the map counts from the genus-resolved closed forms
            let count = closed_form_count(j, g).map_err(|e| e.to_string())?;
            ensure(fe.implied_count(g, j) == Q::from_integer(count.clone()), || {
                format!("g={g} j={j}: implied count {} vs {count}", fmt_rational(&fe.implied_count(g, j)))
            })?;
        }
        for (k, v) in frozen[g].iter().enumerate() {
            ensure(&fe.get(g, k + 1) == v, || format!("g={g} j={}: frozen value", k + 1))?;
        }
    }
    Ok(format!("g ≤ 3, j ≤ 16 exact in {:.2}s", t.elapsed().as_secs_f64()))
}

fn ac3() -> Outcome {
    let c = c2g_constants(4);
    let sqrt3 = QuadExt::sqrt_d(3);
    let big = |b: u32, e: u32| BigInt::from(b).pow(e);
    // 49/(2^15·3^{13/2}) = 49√3/(2^15·3^7)
    let c4 = sqrt3.scale(&Q::new(BigInt::from(49), big(2, 15) * big(3, 7)));
    let c6 = QuadExt::rational(Q::new(BigInt::from(25 * 49), big(2, 21) * big(3, 10)), 3);
    ensure(c[1] == QuadExt::rational(qr(1, 1728), 3), || format!("C2 = {}", c[1]))?;
    ensure(c[2] == c4, || format!("C4 = {} vs {}", c[2], c4))?;
    ensure(c[3] == c6, || format!("C6 = {} vs {}", c[3], c6))?;
    ensure(c[2].to_string() == "49*sqrt(3)/71663616", || format!("C4 prints as {}", c[2]))?;
    ensure(kg_constant(2) == KConstant { coeff: qr(7, 1080), over_sqrt_pi: true }, || format!("K2 = {}", kg_constant(2)))?;
    ensure(kg_constant(3) == KConstant { coeff: qr(245, 995_328), over_sqrt_pi: false }, || {
        format!("K3 = {}", kg_constant(3))
    })?;
    // second route for K: the defining formulas evaluated in floating point
    let k2 = 12f64.powf(4.5) * 2f64.powi(6) / std::f64::consts::PI.sqrt() * 6.0 / 5040.0 * c[2].to_f64();
    let k3 = 12f64.powi(7) / 120.0 * c[3].to_f64() / 12.0;
    ensure((k2 - kg_constant(2).to_f64()).abs() < 1e-12 * k2.abs(), || format!("K2 float {k2}"))?;
    ensure((k3 - kg_constant(3).to_f64()).abs() < 1e-12 * k3.abs(), || format!("K3 float {k3}"))?;
    let table = string_recursion_u(4).map_err(|e| e.to_string())?;
    for g in 1..=4 {
        let (coeff, twice) = singular_structure(&table, g).map_err(|e| e.to_string())?;
        ensure(coeff == c[g] && twice == 1 - 5 * g as i64, || format!("g={g}: {coeff}·t^({twice}/2) vs {}", c[g]))?;
    }
    Ok(format!("C2={} C4={} C6={} K2={} K3={}", c[1], c[2], c[3], kg_constant(2), kg_constant(3)))
}

fn ac4() -> Outcome {
    let mut worst: f64 = 0.0;
    for g in 0..=3usize {
        for j in [50usize, 100, 200] {
            let lib = asymptotic_ratio(j, g).map_err(|e| e.to_string())?;
            // second route: logarithms of the exact counts
            let n = closed_form_count(j, g).map_err(|e| e.to_string())?;
            let ln_fact: f64 = (1..=j).map(|k| (k as f64).ln()).sum();
            let ln_k = kg_constant(g).to_f64().ln();
            let jf = j as f64;
            let ln_ratio = ln_big(&n) - ln_k - jf * 48f64.ln() - ln_fact - (5.0 * g as f64 - 7.0) / 2.0 * jf.ln();
            let mine = ln_ratio.exp();
            ensure((mine - lib).abs() < 1e-9, || format!("g={g} j={j}: {lib} vs {mine}"))?;
            let dev = (lib - 1.0).abs() * jf.sqrt();
            worst = worst.max(dev);
            ensure(dev <= 5.0, || format!("g={g} j={j}: √j|ratio−1| = {dev}"))?;
        }
    }
    let r = asymptotic_ratio(200, 1).map_err(|e| e.to_string())?;
    let predicted = -1.0 / (std::f64::consts::PI.sqrt() * 200f64.sqrt());
    let rel = ((r - 1.0) - predicted).abs() / predicted.abs();
    ensure(rel < 0.2, || format!("genus-1 correction {:.4e} vs {predicted:.4e}", r - 1.0))?;
    Ok(format!("max √j|ratio−1| = {worst:.3}, genus-1 correction off by {:.2}%", 100.0 * rel))
}

fn ac5() -> Outcome {
    let mut lines = Vec::new();
    let cases: [(&str, f64, f64, f64, f64, bool); 3] = [
        ("Re σ=−1", 1.6, 1.9, 1.7795, 5e-3, true),
        ("Re σ=−3", 1.3, 1.7, 1.5025, 5e-3, false),
        ("Im σ=4", -1.5, -0.8, -1.15, 2e-2, true),
    ];
    for (k, &(name, lo, hi, target, tol, use_psi)) in cases.iter().enumerate() {
        let line = |t: f64| match k {
            0 => C64::new(-1.0, t),
            1 => C64::new(-3.0, t),
            _ => C64::new(t, 4.0),
        };
        let t0 = Instant::now();
        let by_regime = bisect_regime(|t| SigmaPoint::from_c(line(t)).unwrap(), lo, hi)?;
        let secs = t0.elapsed().as_secs_f64();
        let by_level = if use_psi {
            psi_root(line, lo, hi)?
        } else {
            bisect_sign(|t| re_phi(line(t)), lo, hi)?
        };
        ensure((by_regime - target).abs() <= tol, || format!("{name}: classifier flip at {by_regime}"))?;
        ensure((by_level - target).abs() <= tol, || format!("{name}: level-set root at {by_level}"))?;
        ensure((by_regime - by_level).abs() < 1e-5, || format!("{name}: routes differ, {by_regime} vs {by_level}"))?;
        ensure(secs < 60.0, || format!("{name}: bisection took {secs:.1}s"))?;
        lines.push(format!("{name}: {by_regime:.5}"));
    }
    // the non-boundary sign change of Re Ψ near 1+3.92i
    let literal = C64::new(1.0, 3.92);
    let r = classify(SigmaPoint::from_c(literal).unwrap(), false).map_err(|e| e.to_string())?;
    ensure(r == PhaseRegime::OneCut, || format!("1+3.92i classifies {r}"))?;
    let y = psi_root(|y| C64::new(1.0, y), 3.85, 3.98)?;
    let set = boundaries().map_err(|e| e.to_string())?;
    let vi = set.get(CurveId::VI).extended();
    let on_curve = vi
        .windows(2)
        .filter(|w| (w[0].re - 1.0) * (w[1].re - 1.0) <= 0.0 && w[0].re != w[1].re)
        .map(|w| w[0] + (w[1] - w[0]) * ((1.0 - w[0].re) / (w[1].re - w[0].re)))
        .min_by(|a, b| (a - literal).norm().total_cmp(&(b - literal).norm()))
        .ok_or("traced curve never meets Re σ = 1")?;
    ensure((on_curve - C64::new(1.0, y)).norm() < 1e-4, || format!("traced fake curve meets Re σ = 1 at {on_curve}, root at 1+{y}i"))?;
    ensure((y - 3.92).abs() < 5e-3, || format!("fake transition at Im σ = {y}"))?;
    let at_curve = re_psi(on_curve).abs();
    ensure(at_curve < 5e-4, || format!("|Re Ψ| = {at_curve} on the fake curve"))?;
    let r2 = classify(SigmaPoint::from_c(on_curve).unwrap(), false).map_err(|e| e.to_string())?;
    ensure(r2 == PhaseRegime::OneCut, || format!("fake curve point classifies {r2}"))?;
    lines.push(format!(
        "fake point 1+3.92i OneCut, curve crosses Re σ=1 at Im σ={y:.4} with |Re Ψ|={at_curve:.1e} (literal point {:.2e})",
        re_psi(literal).abs()
    ));
    Ok(lines.join("; "))
}

fn ac6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = [0.0f64; 3];
    let mut n = [0usize; 3];
    while n[0] < 200 {
        let s = C64::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0));
        if BranchConvention::on_cut(s) {
            continue;
        }
        let e = one_cut(SigmaPoint::from_c(s).unwrap(), 1.0).map_err(|e| e.to_string())?;
        let (b2, z2) = (e.b1 * e.b1, e.z0 * e.z0);
        let r = (b2 + 2.0 * z2 + 2.0 * s).norm().max((b2 * b2 - 4.0 * b2 * z2 - 16.0).norm());
        worst[0] = worst[0].max(r / (1.0 + s.norm_sqr()));
        n[0] += 1;
    }
    while n[1] < 200 {
        let s = C64::new(rng.gen_range(-8.0..-2.1), rng.gen_range(-4.0..4.0));
        let e = two_cut(SigmaPoint::from_c(s).unwrap()).map_err(|e| e.to_string())?;
        let (a, b) = (e.a2 * e.a2, e.b2 * e.b2);
        let r = (a + b + 2.0 * s).norm().max(((a - b) * (a - b) - 16.0).norm());
        worst[1] = worst[1].max(r / (1.0 + s.norm()));
        n[1] += 1;
    }
    let set = boundaries().map_err(|e| e.to_string())?;
    let mut gap_worst: f64 = 0.0;
    while n[2] < 200 {
        let s = sp(rng.gen_range(-5.0..1.0), rng.gen_range(-5.0..5.0));
        let upper = if s.im < 0.0 { s.conj().c() } else { s.c() };
        if set.locate(s) != PhaseRegime::ThreeCut || set.nearest_boundary(upper).1 < 1e-3 {
            continue;
        }
        let e = three_cut(s, None).map_err(|e| format!("{s}: {e}"))?;
        let (a, b, c) = (e.a3 * e.a3, e.b3 * e.b3, e.c3 * e.c3);
        let alg = (a + b + c + 2.0 * s.c())
            .norm()
            .max((a * a + b * b + c * c - 2.0 * (a * b + b * c + a * c) - 16.0).norm());
        worst[2] = worst[2].max(alg).max(e.residual);
        // second route: the gap conditions by direct quadrature along the chords
        let roots = e.roots();
        let g1 = chord_integral(e.a3, e.b3, &roots).re.abs();
        let g2 = chord_integral(e.b3, e.c3, &roots).re.abs();
        gap_worst = gap_worst.max(g1).max(g2);
        n[2] += 1;
    }
    ensure(worst[0] < 1e-12 && worst[1] < 1e-12, || format!("one/two-cut residuals {worst:?}"))?;
    ensure(worst[2] < 1e-8, || format!("three-cut residual {}", worst[2]))?;
    ensure(gap_worst < 1e-8, || format!("independent gap integrals {gap_worst}"))?;
    let one = one_cut(sp(-2.0, 0.0), 1.0).map_err(|e| e.to_string())?;
    let two = two_cut(sp(-2.0 - 1e-12, 0.0)).map_err(|e| e.to_string())?;
    let l1 = lagrange_constant(sp(-2.0, 0.0), PhaseRegime::OneCut).map_err(|e| e.to_string())?;
    let l2 = lagrange_constant(sp(-2.0 - 1e-12, 0.0), PhaseRegime::TwoCut).map_err(|e| e.to_string())?;
    ensure((one.b1 - two.b2).norm() < 1e-10 && (one.b1 - 2.0).norm() < 1e-12, || format!("{one:?} vs {two:?}"))?;
    ensure(one.z0.norm() < 1e-5 && two.a2.norm() < 1e-5, || format!("{one:?} vs {two:?}"))?;
    ensure((l1.ell_star - l2.ell_star).norm() < 1e-10, || format!("ℓ* {} vs {}", l1.ell_star, l2.ell_star))?;
    Ok(format!(
        "600 samples; residuals {:.1e}/{:.1e}/{:.1e}, independent gaps {gap_worst:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn ac7() -> Outcome {
    let mut report = Vec::new();
    let pi = std::f64::consts::PI;
    let cases = [(sp(1.0, 0.0), PhaseRegime::OneCut), (sp(-3.0, 0.0), PhaseRegime::TwoCut), (sp(-1.0, 2.0), PhaseRegime::ThreeCut)];
    for (s, regime) in cases {
        let lands = Lands::new(s, regime).map_err(|e| e.to_string())?;
        let m = lands.mass();
        ensure((m - 1.0).norm() < 1e-6, || format!("σ={s}: mass {m}"))?;
        for d in lands.density_samples() {
            let scale = d.density.norm().max(1e-3);
            ensure(d.density.re > -1e-8 && d.density.im.abs() < 1e-6 * scale, || {
                format!("σ={s}: density {} at {}", d.density, d.point)
            })?;
        }
        let var = lands.variational_residual().map_err(|e| e.to_string())?;
        ensure(var < 1e-8, || format!("σ={s}: variational residual {var}"))?;
        // second route: mass by quadrature independent of the traced support
        let m2 = match regime {
            PhaseRegime::OneCut => {
                let e = one_cut(s, 1.0).unwrap();
                let (b, z2) = (e.b1.re, (e.z0 * e.z0).re);
                simpson(|th| C64::new(((b * th.cos()).powi(2) - z2) * b * b * th.sin().powi(2) / (2.0 * pi), 0.0), 0.0, pi, 2000)
            }
            PhaseRegime::TwoCut => {
                let e = two_cut(s).unwrap();
                let (a, b) = (e.a2.re, e.b2.re);
                let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
                let f = |th: f64| {
                    let x = mid - half * th.cos();
                    C64::new(2.0 * x * ((b * b - x * x) * (x * x - a * a)).max(0.0).sqrt() * half * th.sin() / (2.0 * pi), 0.0)
                };
                simpson(f, 0.0, pi, 4000)
            }
            _ => {
                // −½ · residue at infinity of √Q, by the trapezoid rule on a large circle
                let e = three_cut(s, None).unwrap();
                let roots = [e.a3, e.b3, e.c3];
                let (r, n) = (6.0, 4096);
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    let z = C64::from_polar(r, 2.0 * pi * k as f64 / n as f64);
                    let sq: C64 = roots.iter().map(|&x| (1.0 - x * x / (z * z)).sqrt()).product::<C64>() * z.powi(3);
                    acc += sq * z;
                }
                -acc / (2.0 * n as f64)
            }
        };
        ensure((m2 - 1.0).norm() < 1e-6, || format!("σ={s}: independent mass {m2}"))?;
        report.push(format!("σ={s} mass {:.1e}/{:.1e} var {var:.1e}", (m - 1.0).norm(), (m2 - 1.0).norm()));
    }
    // second route for the variational equality at σ = 1: log potential by quadrature
    let e = one_cut(sp(1.0, 0.0), 1.0).unwrap();
    let (b, z2) = (e.b1.re, (e.z0 * e.z0).re);
    let rho = |s: f64, bm: f64, bp: f64| (s * s - z2) * (bm * bp).sqrt() / (2.0 * pi);
    let ell = lagrange_constant(sp(1.0, 0.0), PhaseRegime::OneCut).map_err(|e| e.to_string())?.ell_star.re;
    let mut spread: f64 = 0.0;
    for frac in [-0.93, -0.6, -0.2, 0.0, 0.35, 0.71, 0.97] {
        let x = frac * b;
        let left = tanh_sinh(|da, db| (db).ln() * rho(-b + da, db + (b - x), da), -b, x);
        let right = tanh_sinh(|da, db| (da).ln() * rho(x + da, db, x + b + da), x, b);
        let v = x * x / 2.0 + x.powi(4) / 4.0;
        let c = 2.0 * (left + right) - v;
        spread = spread.max((c - ell).abs());
    }
    ensure(spread < 1e-8, || format!("2U − V − Re ℓ* reaches {spread:.2e} on the support"))?;
    report.push(format!("independent 2U−V−ℓ* ≤ {spread:.1e}"));
    Ok(report.join("; "))
}

fn ac8() -> Outcome {
    let mut t8 = string_recursion_u(8).map_err(|e| e.to_string())?;
    let x8 = expansion_tables(&mut t8);
    let res = string_residual(&t8, &x8);
    ensure(res.len() == 17, || format!("{} residual orders", res.len()))?;
    for (n, r) in res.iter().enumerate() {
        ensure(r.is_zero(), || format!("string residual at N^-{n}"))?;
    }
    for k in (1..=16).step_by(2) {
        ensure(t8.coefficient(k).is_zero(), || format!("r_{k} nonzero"))?;
        ensure(x8.c[k].is_zero(), || format!("C_{k} nonzero"))?;
    }
    let mut t4 = string_recursion_u(4).map_err(|e| e.to_string())?;
    let x4 = expansion_tables(&mut t4);
    let fe = free_energy_series(&x4, 13).map_err(|e| e.to_string())?;
    for g in 0..=4 {
        let r = verify_ode_identity(&mut t4, &fe, g, 12).map_err(|e| e.to_string())?;
        ensure(r.is_zero(), || format!("ODE identity fails at g={g}"))?;
    }
    // second route (a): the closed-form series satisfy the same ODE
    let closed = FreeEnergySeries {
        coeffs: (0..=4)
            .map(|g| (0..=13).map(|j| closed_form_coefficient(g.min(3), j).filter(|_| g <= 3).unwrap_or_else(|| fe.get(g, j))).collect())
            .collect(),
    };
    for g in 0..=3 {
        let r = verify_ode_identity(&mut t4, &closed, g, 12).map_err(|e| e.to_string())?;
        ensure(r.is_zero(), || format!("closed-form series violates the ODE at g={g}"))?;
    }
    // second route (b): the truncated expansion solves the finite-N string
    // equation with an error shrinking like N^{-2G-2}
    let u = C64::new(0.011, 0.004);
    let w = |kap: f64| (1.0 + 12.0 * u * kap).sqrt();
    let mut slopes = Vec::new();
    for genus in 0..=2usize {
        let t = string_recursion_u(genus).map_err(|e| e.to_string())?;
        let rn = |kap: f64, n: f64| {
            (0..=genus).map(|g| t.eval(g, C64::new(kap, 0.0), u, w(kap)) * n.powi(-2 * g as i32)).sum::<C64>()
        };
        let resid = |n: f64| {
            let r0 = rn(1.0, n);
            (r0 * (1.0 + u * (rn(1.0 - 1.0 / n, n) + r0 + rn(1.0 + 1.0 / n, n))) - 1.0).norm()
        };
        let slope = (resid(6.0) / resid(12.0)).log2();
        let expect = 2.0 * genus as f64 + 2.0;
        ensure((slope - expect).abs() < 0.25, || format!("G={genus}: finite-N residual decays like N^-{slope:.2}"))?;
        slopes.push(format!("{slope:.2}"));
    }
    Ok(format!("exact through N^-16 and u^12; finite-N residual orders {} for G = 0, 1, 2", slopes.join(", ")))
}

fn ac9() -> Outcome {
    let set = boundaries().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dirs: Vec<f64> = (0..8).map(|k| std::f64::consts::PI / 8.0 + k as f64 * std::f64::consts::FRAC_PI_4).collect();
    let gap = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
        d.min(2.0 * std::f64::consts::PI - d)
    };
    let (mut worst_angle, mut worst_sym): (f64, f64) = (0.0, 0.0);
    let mut independent_sym: f64 = 0.0;
    for regime in [PhaseRegime::OneCut, PhaseRegime::TwoCut, PhaseRegime::ThreeCut] {
        let mut taken = 0;
        while taken < 10 {
            let s = sp(rng.gen_range(-5.0..3.0), rng.gen_range(-5.0..5.0));
            let upper = if s.im < 0.0 { s.conj().c() } else { s.c() };
            if set.locate(s) != regime || set.nearest_boundary(upper).1 < 0.05 {
                continue;
            }
            taken += 1;
            let g = critical_graph(&build_qd(s, regime).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let mut hit = [false; 8];
            for &a in &g.census {
                let (k, d) = dirs.iter().enumerate().map(|(k, &c)| (k, gap(a, c))).min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
                hit[k] = true;
                worst_angle = worst_angle.max(d);
            }
            ensure(hit.iter().all(|&h| h), || format!("σ={s}: directions {hit:?}"))?;
            ensure((g.census_error() - g.census.iter().map(|&a| dirs.iter().map(|&c| gap(a, c)).fold(9.0, f64::min)).fold(0.0, f64::max)).abs() < 1e-12, || "census error disagrees".into())?;
            worst_sym = worst_sym.max(g.symmetry_error());
            if taken == 1 {
                // mirror every sample and measure its distance to the whole graph
                let polys: Vec<&Vec<C64>> = g.trajectories.iter().map(|t| &t.samples).collect();
                for t in &g.trajectories {
                    for &p in t.samples.iter().step_by(7) {
                        let m = -p;
                        let d = polys
                            .iter()
                            .flat_map(|pl| pl.windows(2))
                            .map(|w| {
                                let dd = w[1] - w[0];
                                let l2 = dd.norm_sqr();
                                let tt = if l2 == 0.0 { 0.0 } else { (((m - w[0]) * dd.conj()).re / l2).clamp(0.0, 1.0) };
                                (m - (w[0] + dd * tt)).norm()
                            })
                            .fold(f64::INFINITY, f64::min);
                        independent_sym = independent_sym.max(d);
                    }
                }
            }
        }
    }
    ensure(worst_angle < 1e-3, || format!("asymptotic angle error {worst_angle}"))?;
    ensure(worst_sym < 1e-6 && independent_sym < 1e-6, || format!("symmetry {worst_sym} / {independent_sym}"))?;
    let g = critical_graph(&build_qd(sp(1.0, 0.0), PhaseRegime::OneCut).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let b = ((-2.0 + 2.0 * 13f64.sqrt()) / 3.0).sqrt();
    let support = g
        .trajectories
        .iter()
        .find(|t| (t.seed_point - b).norm() < 1e-12 && t.samples.last().is_some_and(|z| (z + b).norm() < 1e-6))
        .ok_or("σ=1: no trajectory from b to −b")?;
    let off = support.samples.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    ensure(off < 1e-8, || format!("σ=1 support leaves the real axis by {off}"))?;
    Ok(format!("30 graphs, angle error {worst_angle:.1e}, symmetry {worst_sym:.1e}/{independent_sym:.1e}, σ=1 support |Im| ≤ {off:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("AC1 map-count oracle equivalence", ac1),
        ("AC2 generating-function equality", ac2),
        ("AC3 constants and singular structure", ac3),
        ("AC4 asymptotic ratios", ac4),
        ("AC5 phase-boundary reference values", ac5),
        ("AC6 endpoint identity suite", ac6),
        ("AC7 equilibrium-measure properties", ac7),
        ("AC8 exact series identities", ac8),
        ("AC9 trajectory-tracer properties", ac9),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("PASS {name} ({secs:.1}s): {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
