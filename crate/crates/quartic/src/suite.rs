//! The invariant suite behind `quartic verify --all`: exact counting and
//! series identities, constants, endpoint algebra, measure properties,
//! phase-diagram landmarks and tracer geometry.

use std::time::Instant;

use rayon::prelude::*;

use crate::algebra::{q, qr, QuadExt, Q};
use crate::endpoints::{one_cut, three_cut, two_cut};
use crate::gfunction::Lands;
use crate::maps::{
    asymptotic_ratio, c2g_constants, closed_form_count, connected_identity_holds, enumerate_census, kg_constant,
    KConstant,
};
use crate::model::{BranchConvention, PhaseRegime, SigmaPoint, C64};
use crate::phase::{boundaries, classify, psi};
use crate::quaddiff::{build_qd, critical_graph};
use crate::topo::{
    closed_form_coefficient, expansion_tables, free_energy_series, singular_structure, string_recursion_u,
    string_residual, verify_ode_identity,
};

/// Outcome of one check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = fn() -> Result<String, String>;

const CHECKS: [(&str, Check); 11] = [
    ("map census equals closed forms", census),
    ("free-energy series equals closed forms", series),
    ("constants C2g and Kg", constants),
    ("singular structure matches C2g", singular),
    ("asymptotic ratios", asymptotics),
    ("string residual and ODE identity", exact_identities),
    ("endpoint identities", endpoint_identities),
    ("measure mass and variational equality", measure),
    ("phase-diagram landmarks", landmarks),
    ("phase boundaries along reference lines", reference_lines),
    ("critical-graph geometry", tracer),
];

/// Names of the checks, in run order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Run every check, sequentially, catching panics as failures.
pub fn run_all() -> Vec<CheckOutcome> {
    CHECKS.iter().map(|&(name, f)| run_one(name, f)).collect()
}

fn run_one(name: &'static str, f: Check) -> CheckOutcome {
    let t = Instant::now();
    let res = std::panic::catch_unwind(f).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(msg)
    });
    let (passed, detail) = match res {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CheckOutcome { name, passed, detail, seconds: t.elapsed().as_secs_f64() }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Low-discrepancy points in the unit square (additive recurrence on the
/// plastic number), reproducible without a random generator.
fn unit_points(n: usize) -> impl Iterator<Item = (f64, f64)> {
    let p = 1.324_717_957_244_746;
    let (a1, a2) = (1.0 / p, 1.0 / (p * p));
    (1..=n).map(move |k| ((0.5 + a1 * k as f64).fract(), (0.5 + a2 * k as f64).fract()))
}

fn census() -> Result<String, String> {
    for j in 1..=4 {
        let c = enumerate_census(j, false).map_err(|e| e.to_string())?;
        for g in 0..=3 {
            let expect = closed_form_count(j, g).map_err(|e| e.to_string())?;
            let got = c.counts.get(g).copied().unwrap_or(0);
            ensure(expect == got.into(), || format!("j={j} g={g}: census {got}, closed form {expect}"))?;
        }
        ensure(c.counts.iter().sum::<u64>() == c.connected, || format!("j={j}: genus counts do not sum"))?;
    }
    let connected: Vec<u64> = (1..=4).map(|j| enumerate_census(j, false).unwrap().connected).collect();
    ensure(connected == [3, 96, 9504, 1_880_064], || format!("connected totals {connected:?}"))?;
    ensure(connected_identity_holds(&connected), || "exponential-formula identity fails".into())?;
    Ok("j ≤ 4, g ≤ 3 exact".into())
}

fn series() -> Result<String, String> {
    let mut t = string_recursion_u(3).map_err(|e| e.to_string())?;
    let x = expansion_tables(&mut t);
    let fe = free_energy_series(&x, 16).map_err(|e| e.to_string())?;
    for g in 0..=3 {
        for j in 1..=16 {
            let cf = closed_form_coefficient(g, j).ok_or("closed form missing")?;
            ensure(fe.get(g, j) == cf, || format!("g={g} j={j}: {} vs {}", fe.get(g, j), cf))?;
            let count = closed_form_count(j, g).map_err(|e| e.to_string())?;
            ensure(fe.implied_count(g, j) == Q::from_integer(count), || format!("g={g} j={j}: count bridge"))?;
        }
    }
    Ok("g ≤ 3, j ≤ 16 exact".into())
}

fn constants() -> Result<String, String> {
    let c = c2g_constants(3);
    let sqrt3 = |x: Q| QuadExt::sqrt_d(3).scale(&x);
    ensure(c[0] == sqrt3(q(-4)), || format!("C0 = {}", c[0]))?;
    ensure(c[1] == QuadExt::rational(qr(1, 1728), 3), || format!("C2 = {}", c[1]))?;
    ensure(c[2] == sqrt3(qr(49, 71_663_616)), || format!("C4 = {}", c[2]))?;
    let c6 = Q::new(1225.into(), (num_bigint::BigInt::from(2).pow(21)) * num_bigint::BigInt::from(3).pow(10));
    ensure(c[3] == QuadExt::rational(c6, 3), || format!("C6 = {}", c[3]))?;
    ensure(kg_constant(1) == KConstant { coeff: qr(1, 24), over_sqrt_pi: false }, || "K1".into())?;
    ensure(kg_constant(2) == KConstant { coeff: qr(7, 1080), over_sqrt_pi: true }, || format!("K2 = {}", kg_constant(2)))?;
    ensure(kg_constant(3) == KConstant { coeff: qr(245, 995_328), over_sqrt_pi: false }, || {
        format!("K3 = {}", kg_constant(3))
    })?;
    Ok("C0..C6, K1..K3 exact".into())
}

fn singular() -> Result<String, String> {
    let t = string_recursion_u(4).map_err(|e| e.to_string())?;
    let c = c2g_constants(4);
    for g in 1..=4 {
        let (coeff, twice) = singular_structure(&t, g).map_err(|e| e.to_string())?;
        ensure(coeff == c[g], || format!("g={g}: {coeff} vs {}", c[g]))?;
        ensure(twice == 1 - 5 * g as i64, || format!("g={g}: exponent {twice}/2"))?;
    }
    Ok("g ≤ 4 exact".into())
}

fn asymptotics() -> Result<String, String> {
    for g in 0..=3 {
        for j in [50usize, 100, 200] {
            let r = asymptotic_ratio(j, g).map_err(|e| e.to_string())?;
            ensure((r - 1.0).abs() <= 5.0 / (j as f64).sqrt(), || format!("g={g} j={j}: ratio {r}"))?;
        }
    }
    let j: f64 = 200.0;
    let r = asymptotic_ratio(200, 1).map_err(|e| e.to_string())?;
    let predicted = -1.0 / (std::f64::consts::PI.sqrt() * j.sqrt());
    let rel = ((r - 1.0) - predicted).abs() / predicted.abs();
    ensure(rel < 0.2, || format!("genus-1 correction off by {rel}"))?;
    Ok(format!("genus-1 correction within {:.1}%", 100.0 * rel))
}

fn exact_identities() -> Result<String, String> {
    let mut t = string_recursion_u(8).map_err(|e| e.to_string())?;
    let x = expansion_tables(&mut t);
    let res = string_residual(&t, &x);
    for (n, r) in res.iter().enumerate() {
        ensure(r.is_zero(), || format!("string residual at order N^-{n} is nonzero"))?;
    }
    for (j, c) in x.c.iter().enumerate().skip(1).step_by(2) {
        ensure(c.is_zero(), || format!("C_{j} nonzero"))?;
    }
    for k in (1..=2 * t.genus()).step_by(2) {
        ensure(t.coefficient(k).is_zero(), || format!("r_{k} nonzero"))?;
    }
    let mut t4 = string_recursion_u(4).map_err(|e| e.to_string())?;
    let x4 = expansion_tables(&mut t4);
    let fe = free_energy_series(&x4, 13).map_err(|e| e.to_string())?;
    for g in 0..=4 {
        let r = verify_ode_identity(&mut t4, &fe, g, 12).map_err(|e| e.to_string())?;
        ensure(r.is_zero(), || format!("ODE identity fails at g={g}"))?;
    }
    Ok(format!("residual zero through N^-{}", res.len() - 1))
}

fn endpoint_identities() -> Result<String, String> {
    let mut worst = [0.0f64; 3];
    for (u, v) in unit_points(200) {
        let s = C64::new(-6.0 + 12.0 * u, -6.0 + 12.0 * v);
        if BranchConvention::on_cut(s) {
            continue;
        }
        let e = one_cut(SigmaPoint::from_c(s).unwrap(), 1.0).map_err(|e| e.to_string())?;
        for r in e.residuals(s) {
            worst[0] = worst[0].max(r.norm() / (1.0 + s.norm_sqr()));
        }
        let s2 = C64::new(-8.0 + 5.9 * u, -4.0 + 8.0 * v);
        let e = two_cut(SigmaPoint::from_c(s2).unwrap()).map_err(|e| e.to_string())?;
        for r in e.residuals(s2) {
            worst[1] = worst[1].max(r.norm() / (1.0 + s2.norm()));
        }
    }
    let set = boundaries().map_err(|e| e.to_string())?;
    let samples: Vec<SigmaPoint> = unit_points(4000)
        .map(|(u, v)| SigmaPoint::new(-5.0 + 6.0 * u, -5.0 + 10.0 * v).unwrap())
        .filter(|&s| {
            let upper = if s.im < 0.0 { s.conj().c() } else { s.c() };
            set.locate(s) == PhaseRegime::ThreeCut && set.nearest_boundary(upper).1 >= 1e-3
        })
        .take(200)
        .collect();
    let taken = samples.len();
    let three = samples
        .par_iter()
        .map(|&s| {
            let e = three_cut(s, None).map_err(|e| format!("{s}: {e}"))?;
            Ok(e.algebraic_residuals(s.c()).iter().map(|r| r.norm()).fold(e.residual, f64::max))
        })
        .collect::<Result<Vec<f64>, String>>()?;
    worst[2] = three.into_iter().fold(0.0, f64::max);
    ensure(taken == 200, || format!("only {taken} three-cut samples"))?;
    ensure(worst[0] < 1e-12 && worst[1] < 1e-12, || format!("one/two-cut residuals {worst:?}"))?;
    ensure(worst[2] < 1e-8, || format!("three-cut residual {}", worst[2]))?;
    let one = one_cut(SigmaPoint::from(-2.0), 1.0).map_err(|e| e.to_string())?;
    let two = two_cut(SigmaPoint::from(-2.0 - 1e-12)).map_err(|e| e.to_string())?;
    ensure((one.b1 - two.b2).norm() < 1e-10 && two.a2.norm() < 1e-5 && one.z0.norm() < 1e-5, || {
        format!("σ=−2 degeneration: {one:?} vs {two:?}")
    })?;
    Ok(format!("worst residuals {:.1e} / {:.1e} / {:.1e}", worst[0], worst[1], worst[2]))
}

fn measure() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    for (re, im, regime) in [(1.0, 0.0, PhaseRegime::OneCut), (-3.0, 0.0, PhaseRegime::TwoCut), (-1.0, 2.0, PhaseRegime::ThreeCut)] {
        let s = SigmaPoint::new(re, im).unwrap();
        let lands = Lands::new(s, regime).map_err(|e| e.to_string())?;
        let m = lands.mass();
        worst = worst.max((m - 1.0).norm());
        for d in lands.density_samples() {
            let scale = d.density.norm().max(1e-3);
            ensure(d.density.re > -1e-8 && d.density.im.abs() < 1e-6 * scale, || {
                format!("σ={s}: density {} at {}", d.density, d.point)
            })?;
        }
        worst_var = worst_var.max(lands.variational_residual().map_err(|e| e.to_string())?);
    }
    ensure(worst < 1e-6, || format!("mass error {worst}"))?;
    ensure(worst_var < 1e-8, || format!("variational residual {worst_var}"))?;
    Ok(format!("mass error {worst:.1e}, variational {worst_var:.1e}"))
}

fn landmarks() -> Result<String, String> {
    let cases = [
        (1.0, 0.0, "OneCut"),
        (-3.0, 0.0, "TwoCut"),
        (-2.0, 0.0, "MultiCritical(-2)"),
        (0.0, crate::model::SQRT12, "MultiCritical(+i*sqrt(12))"),
        (-1.0, 2.0, "ThreeCut"),
        (-3.0, 2.0, "ThreeCut"),
        (-3.0, 1.0, "TwoCut"),
        (1.0, 3.92, "OneCut"),
    ];
    for (re, im, want) in cases {
        let r = classify(SigmaPoint::new(re, im).unwrap(), false).map_err(|e| e.to_string())?;
        ensure(r.to_string() == want, || format!("σ={re}+{im}i: {r}, expected {want}"))?;
    }
    for (re, im) in [(1.0, 0.0), (-3.0, 0.0), (-1.0, 2.0)] {
        classify(SigmaPoint::new(re, im).unwrap(), true).map_err(|e| e.to_string())?;
    }
    Ok("classification and verification of reference points".into())
}

fn flip(f: &dyn Fn(f64) -> SigmaPoint, mut lo: f64, mut hi: f64) -> Result<f64, String> {
    let r0 = classify(f(lo), false).map_err(|e| e.to_string())?;
    ensure(classify(f(hi), false).map_err(|e| e.to_string())? != r0, || "no flip in bracket".into())?;
    for _ in 0..40 {
        let m = 0.5 * (lo + hi);
        if classify(f(m), false).map_err(|e| e.to_string())? == r0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn reference_lines() -> Result<String, String> {
    let sp = |re: f64, im: f64| SigmaPoint::new(re, im).unwrap();
    let a = flip(&|y| sp(-1.0, y), 1.6, 1.9)?;
    let b = flip(&|y| sp(-3.0, y), 1.3, 1.7)?;
    let c = flip(&|x| sp(x, 4.0), -1.5, -0.8)?;
    ensure((a - 1.7795).abs() < 5e-3, || format!("Re σ = −1: flip at {a}"))?;
    ensure((b - 1.5025).abs() < 5e-3, || format!("Re σ = −3: flip at {b}"))?;
    ensure((c + 1.15).abs() < 2e-2, || format!("Im σ = 4: flip at {c}"))?;
    let fake = psi(sp(1.0, 3.9187)).map_err(|e| e.to_string())?.re.abs();
    ensure(fake < 5e-4, || format!("|Re Ψ| = {fake} near 1+3.92i"))?;
    Ok(format!("flips at {a:.4}, {b:.4}, {c:.4}"))
}

fn tracer() -> Result<String, String> {
    let set = boundaries().map_err(|e| e.to_string())?;
    let mut worst_census: f64 = 0.0;
    let mut worst_sym: f64 = 0.0;
    for regime in [PhaseRegime::OneCut, PhaseRegime::TwoCut, PhaseRegime::ThreeCut] {
        let mut taken = 0;
        for (u, v) in unit_points(2000) {
            if taken == 4 {
                break;
            }
            let s = SigmaPoint::new(-5.0 + 8.0 * u, -5.0 + 10.0 * v).unwrap();
            if set.locate(s) != regime || set.nearest_boundary(if s.im < 0.0 { s.conj().c() } else { s.c() }).1 < 0.05 {
                continue;
            }
            taken += 1;
            let g = critical_graph(&build_qd(s, regime).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            ensure(g.census_bins().iter().all(|&c| c > 0), || format!("σ={s}: bins {:?}", g.census_bins()))?;
            worst_census = worst_census.max(g.census_error());
            worst_sym = worst_sym.max(g.symmetry_error());
        }
    }
    ensure(worst_census < 1e-3, || format!("census error {worst_census}"))?;
    ensure(worst_sym < 1e-6, || format!("symmetry error {worst_sym}"))?;
    let g = critical_graph(&build_qd(SigmaPoint::from(1.0), PhaseRegime::OneCut).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let b = g.critical[0].z;
    let support = g.arc(b, -b, 1e-9).or_else(|| g.arc(-b, b, 1e-9)).ok_or("σ=1: support not traced")?;
    let off = support.samples.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    ensure(off < 1e-8, || format!("σ=1 support leaves the axis by {off}"))?;
    Ok(format!("census {worst_census:.1e}, symmetry {worst_sym:.1e}"))
}
