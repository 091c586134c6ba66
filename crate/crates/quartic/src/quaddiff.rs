//! Quadratic differentials `Q(z) dz²` with `Q = N(z)/z^d`, and tracing of
//! their critical (`Re η` constant) and orthogonal (`Im η` constant)
//! trajectories, where `η = −∫√Q dz`.

use std::fmt::Write as _;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::endpoints::{one_cut, three_cut, two_cut, EndpointError, ThreeCutEndpoints};
use crate::model::{PhaseRegime, SigmaPoint, C64};
use crate::numeric::{align, dist_to_polyline, gl};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum QdError {
    #[error(transparent)]
    Endpoints(#[from] EndpointError),
    #[error("regime {0} has no quadratic differential")]
    NoRegime(String),
    #[error("seed index {0} is not a critical point")]
    SeedNotCritical(usize),
    #[error("square-root branch lost near {0}")]
    BranchLost(C64),
    #[error("point {0} lies on the critical graph")]
    OnGraph(C64),
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CriticalPoint {
    #[serde(serialize_with = "ser_c64")]
    pub z: C64,
    /// Order of the zero of `Q`.
    pub order: u32,
}

pub(crate) fn ser_c64<S: serde::Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

fn ser_c64_vec<S: serde::Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut q = s.serialize_seq(Some(v.len()))?;
    for z in v {
        q.serialize_element(&[z.re, z.im])?;
    }
    q.end()
}

/// `Q(z) = N(z) / z^d` with `N` given by ascending coefficients.
#[derive(Clone, Debug, serde::Serialize)]
pub struct QuadraticDifferential {
    pub label: String,
    pub regime: Option<PhaseRegime>,
    #[serde(serialize_with = "ser_c64_vec")]
    pub numer: Vec<C64>,
    pub denom_power: u32,
    pub critical: Vec<CriticalPoint>,
}

/// Expand `Π (z² − r_k)` into ascending coefficients.
fn even_product(roots_sq: &[C64]) -> Vec<C64> {
    let mut p = vec![C64::new(1.0, 0.0)];
    for &r in roots_sq {
        let mut next = vec![C64::new(0.0, 0.0); p.len() + 2];
        for (i, &c) in p.iter().enumerate() {
            next[i + 2] += c;
            next[i] -= c * r;
        }
        p = next;
    }
    p
}

impl QuadraticDifferential {
    pub fn new(label: &str, numer: Vec<C64>, denom_power: u32, critical: Vec<CriticalPoint>) -> Self {
        QuadraticDifferential { label: label.to_string(), regime: None, numer, denom_power, critical }
    }

    pub fn eval(&self, z: C64) -> C64 {
        let n = self.numer.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
        if self.denom_power == 0 {
            n
        } else {
            n / z.powu(self.denom_power)
        }
    }

    /// Coefficients of odd powers vanish to `tol` (relative).
    pub fn is_even(&self, tol: f64) -> bool {
        let scale = self.numer.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        self.numer.iter().skip(1).step_by(2).all(|c| c.norm() <= tol * scale)
    }

    /// Typical length scale: the largest critical-point modulus, at least one.
    pub fn scale(&self) -> f64 {
        self.critical.iter().map(|c| c.z.norm()).fold(1.0, f64::max)
    }

    /// Leading coefficient `c` of `Q(p + w) ≈ c·w^m`, by averaging over a
    /// small circle.
    pub fn local_coefficient(&self, idx: usize) -> C64 {
        let cp = self.critical[idx];
        let eps = 1e-3 * self.nearest_other(cp.z).min(1.0);
        let n = 16;
        (0..n)
            .map(|k| {
                let w = C64::from_polar(eps, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
                self.eval(cp.z + w) / w.powu(cp.order)
            })
            .sum::<C64>()
            / n as f64
    }

    fn nearest_other(&self, z: C64) -> f64 {
        let mut d = self
            .critical
            .iter()
            .map(|c| (c.z - z).norm())
            .filter(|&d| d > 1e-12)
            .fold(f64::INFINITY, f64::min);
        if self.denom_power > 0 && z.norm() > 1e-12 {
            d = d.min(z.norm());
        }
        if d.is_finite() {
            d
        } else {
            1.0
        }
    }

    /// Local directions at critical point `idx`: `(π + 2kπ − arg c)/(m+2)`
    /// for critical trajectories, `(2kπ − arg c)/(m+2)` for orthogonal ones.
    pub fn seed_angles(&self, idx: usize, kind: TrajectoryKind) -> Vec<f64> {
        let m = self.critical[idx].order as f64;
        let c = self.local_coefficient(idx);
        let off = match kind {
            TrajectoryKind::Critical => std::f64::consts::PI,
            TrajectoryKind::Orthogonal => 0.0,
        };
        let n = self.critical[idx].order + 2;
        (0..n)
            .map(|k| {
                let t = (off + 2.0 * std::f64::consts::PI * k as f64 - c.arg()) / (m + 2.0);
                t.rem_euclid(2.0 * std::f64::consts::PI)
            })
            .collect()
    }

    /// Points where the tangent field is singular: zeros and the pole.
    fn singular_points(&self) -> Vec<C64> {
        let mut v: Vec<C64> = self.critical.iter().map(|c| c.z).collect();
        if self.denom_power > 0 {
            v.push(C64::new(0.0, 0.0));
        }
        v
    }
}

/// Regime quadratic differential: `(z²−z0²)²(z²−b1²)`, `z²(z²−a2²)(z²−b2²)`
/// or `(z²−a3²)(z²−b3²)(z²−c3²)`.
pub fn build_qd(sigma: SigmaPoint, regime: PhaseRegime) -> Result<QuadraticDifferential, QdError> {
    match regime {
        PhaseRegime::OneCut => {
            let e = one_cut(sigma, 1.0)?;
            let (b, z0) = (e.b1, e.z0);
            let numer = even_product(&[z0 * z0, z0 * z0, b * b]);
            let mut critical = vec![CriticalPoint { z: b, order: 1 }, CriticalPoint { z: -b, order: 1 }];
            if z0.norm() < 1e-12 {
                critical.push(CriticalPoint { z: C64::new(0.0, 0.0), order: 4 });
            } else {
                critical.push(CriticalPoint { z: z0, order: 2 });
                critical.push(CriticalPoint { z: -z0, order: 2 });
            }
            let mut q = QuadraticDifferential::new("OneCut", numer, 0, critical);
            q.regime = Some(regime);
            Ok(q)
        }
        PhaseRegime::TwoCut => {
            let e = two_cut(sigma)?;
            let numer = even_product(&[C64::new(0.0, 0.0), e.a2 * e.a2, e.b2 * e.b2]);
            let critical = vec![
                CriticalPoint { z: e.b2, order: 1 },
                CriticalPoint { z: -e.b2, order: 1 },
                CriticalPoint { z: e.a2, order: 1 },
                CriticalPoint { z: -e.a2, order: 1 },
                CriticalPoint { z: C64::new(0.0, 0.0), order: 2 },
            ];
            let mut q = QuadraticDifferential::new("TwoCut", numer, 0, critical);
            q.regime = Some(regime);
            Ok(q)
        }
        PhaseRegime::ThreeCut => {
            let e = three_cut(sigma, None)?;
            Ok(three_cut_qd(&e))
        }
        r => Err(QdError::NoRegime(r.to_string())),
    }
}

/// Three-cut differential from already solved endpoints.
pub fn three_cut_qd(e: &ThreeCutEndpoints) -> QuadraticDifferential {
    let numer = even_product(&[e.a3 * e.a3, e.b3 * e.b3, e.c3 * e.c3]);
    let critical = [e.c3, -e.c3, e.b3, -e.b3, e.a3, -e.a3]
        .into_iter()
        .map(|z| CriticalPoint { z, order: 1 })
        .collect();
    let mut q = QuadraticDifferential::new("ThreeCut", numer, 0, critical);
    q.regime = Some(PhaseRegime::ThreeCut);
    q
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum TrajectoryKind {
    Critical,
    Orthogonal,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub enum Terminal {
    HitsCriticalPoint { index: usize },
    Asymptotic { angle: f64 },
    StepLimit,
    Stopped,
}

impl Terminal {
    pub fn label(&self) -> String {
        match self {
            Terminal::HitsCriticalPoint { index } => format!("hits:{index}"),
            Terminal::Asymptotic { angle } => format!("asymptotic:{angle:.9}"),
            Terminal::StepLimit => "step-limit".into(),
            Terminal::Stopped => "stopped".into(),
        }
    }
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct Trajectory {
    #[serde(serialize_with = "ser_c64_vec")]
    pub samples: Vec<C64>,
    /// `η(sample) − η(seed)` with the square root continued along the path.
    #[serde(serialize_with = "ser_c64_vec")]
    pub eta: Vec<C64>,
    pub seed_index: usize,
    #[serde(serialize_with = "ser_c64")]
    pub seed_point: C64,
    pub seed_direction_index: usize,
    pub seed_angle: f64,
    pub kind: TrajectoryKind,
    pub terminal: Terminal,
}

impl Trajectory {
    /// Largest deviation of the conserved part of `η` from its seed value.
    pub fn level_drift(&self) -> f64 {
        self.eta
            .iter()
            .map(|e| match self.kind {
                TrajectoryKind::Critical => e.re.abs(),
                TrajectoryKind::Orthogonal => e.im.abs(),
            })
            .fold(0.0, f64::max)
    }
}

pub type PointFn = Arc<dyn Fn(C64) -> f64 + Send + Sync>;
pub type StopFn = Arc<dyn Fn(C64) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct TraceOptions {
    pub rmax: f64,
    pub hmin: f64,
    pub hmax: f64,
    pub tol: f64,
    pub trace_tol: f64,
    pub max_steps: usize,
    /// Trajectories stop within this distance of the pole at the origin.
    pub pole_guard: f64,
    /// Extra pointwise bound on the step length.
    pub step_limit: Option<PointFn>,
    /// Extra stopping rule.
    pub stop: Option<StopFn>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            rmax: 20.0,
            hmin: 1e-6,
            hmax: 0.05,
            tol: 1e-10,
            trace_tol: 1e-9,
            max_steps: 100_000,
            pole_guard: 0.02,
            step_limit: None,
            stop: None,
        }
    }
}

impl std::fmt::Debug for TraceOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TraceOptions")
            .field("rmax", &self.rmax)
            .field("hmin", &self.hmin)
            .field("hmax", &self.hmax)
            .field("tol", &self.tol)
            .field("max_steps", &self.max_steps)
            .finish()
    }
}

struct Tracer<'a> {
    qd: &'a QuadraticDifferential,
    kind: TrajectoryKind,
    singular: Vec<C64>,
}

impl Tracer<'_> {
    fn sqrt_q(&self, z: C64, reference: C64) -> C64 {
        align(self.qd.eval(z).sqrt(), reference)
    }

    /// Unit tangent aligned with `dir`.
    fn tangent(&self, z: C64, dir: C64) -> C64 {
        let s = self.qd.eval(z).sqrt();
        let n = s.norm();
        if n == 0.0 || !n.is_finite() {
            return dir;
        }
        let t = match self.kind {
            TrajectoryKind::Critical => C64::new(0.0, 1.0) * s.conj() / n,
            TrajectoryKind::Orthogonal => s.conj() / n,
        };
        if (t * dir.conj()).re >= 0.0 {
            t
        } else {
            -t
        }
    }

    /// `−∫ √Q` along the chord `[p, q]`, continuing the root from `sq`.
    fn eta_increment(&self, p: C64, q: C64, sq: C64) -> (C64, C64) {
        let d = q - p;
        let mut f = |t: f64| self.sqrt_q(p + d * t, sq);
        let v = gl(&mut f, 0.0, 1.0, 10) * d;
        (-v, self.sqrt_q(q, sq))
    }

    /// `−∫ √Q` from `p` to a singular point `s`, with the endpoint
    /// singularity absorbed by a cosine substitution.
    fn eta_to_point(&self, p: C64, s: C64, sq: C64) -> C64 {
        let d = s - p;
        let mut f = |th: f64| {
            let t = 0.5 * (1.0 - th.cos());
            let z = p + d * t;
            let reference = self.sqrt_q(p + d * (0.5 * t), sq);
            self.sqrt_q(z, reference) * (0.5 * th.sin())
        };
        -gl(&mut f, 0.0, std::f64::consts::PI, 20) * d
    }

    fn dist_singular(&self, z: C64) -> f64 {
        self.singular.iter().map(|&p| (z - p).norm()).fold(f64::INFINITY, f64::min)
    }
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Trace the trajectory leaving critical point `seed` along local direction
/// `dir_index` (see [`QuadraticDifferential::seed_angles`]).
pub fn trace(
    qd: &QuadraticDifferential,
    seed: usize,
    dir_index: usize,
    kind: TrajectoryKind,
    opts: &TraceOptions,
) -> Result<Trajectory, QdError> {
    let cp = *qd.critical.get(seed).ok_or(QdError::SeedNotCritical(seed))?;
    let angles = qd.seed_angles(seed, kind);
    let theta = *angles.get(dir_index).ok_or(QdError::SeedNotCritical(seed))?;
    let tr = Tracer { qd, kind, singular: qd.singular_points() };
    let p = cp.z;
    let m = cp.order as f64;
    let c = qd.local_coefficient(seed);
    let r0 = 1e-5 * qd.nearest_other(p).min(1.0);
    let w = C64::from_polar(r0, theta);
    let mut z = p + w;
    // local model η ≈ −√c·w^{(m+2)/2}·2/(m+2), with the root fixed by √Q(z)
    let local_sq = c.sqrt() * C64::from_polar(r0.powf(m / 2.0), theta * m / 2.0);
    let mut sq = align(qd.eval(z).sqrt(), local_sq);
    let mut eta = -local_sq * w * (2.0 / (m + 2.0));
    let mut dir = C64::from_polar(1.0, theta);
    let target = 0.0;
    let mut samples = vec![p, z];
    let mut etas = vec![C64::new(0.0, 0.0), eta];
    let mut h = r0;
    let mut half_point: Option<C64> = None;
    let scale = qd.scale();
    let mut terminal = Terminal::StepLimit;
    let mut left_seed = false;

    for _ in 0..opts.max_steps {
        let dnear = tr.dist_singular(z);
        let mut hcap = opts.hmax.min(0.25 * dnear).max(opts.hmin);
        if let Some(lim) = &opts.step_limit {
            hcap = hcap.min(lim(z)).max(opts.hmin);
        }
        h = h.min(hcap);
        // one adaptive Dormand–Prince step
        let (znew, dnew) = loop {
            let mut k = [C64::new(0.0, 0.0); 7];
            k[0] = tr.tangent(z, dir);
            for s in 1..7 {
                let mut acc = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += kj * A[s - 1][j];
                }
                k[s] = tr.tangent(z + acc * h, k[s - 1]);
            }
            let mut z5 = z;
            let mut z4 = z;
            for j in 0..7 {
                z5 += k[j] * (h * B5[j]);
                z4 += k[j] * (h * B4[j]);
            }
            let err = (z5 - z4).norm();
            let tol = opts.tol;
            if err <= tol || h <= opts.hmin {
                let grow = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 5.0 };
                let next = h * grow.clamp(0.2, 5.0);
                let d = (z5 - z).unscale((z5 - z).norm().max(1e-300));
                h = next.max(opts.hmin);
                break (z5, d);
            }
            h = (h * (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.9)).max(opts.hmin);
        };
        let (de, sq_new) = tr.eta_increment(z, znew, sq);
        let mut zc = znew;
        let mut eta_c = eta + de;
        let mut sq_c = sq_new;
        // corrector along the normal
        for _ in 0..3 {
            let n = sq_c.norm();
            if n < 1e-8 {
                break;
            }
            let drift = match kind {
                TrajectoryKind::Critical => eta_c.re - target,
                TrajectoryKind::Orthogonal => eta_c.im - target,
            };
            if drift.abs() < 1e-15 * scale.max(1.0) {
                break;
            }
            let normal = match kind {
                TrajectoryKind::Critical => sq_c.conj() / n,
                TrajectoryKind::Orthogonal => C64::new(0.0, 1.0) * sq_c.conj() / n,
            };
            let delta = normal * (drift / n);
            let (de2, sq2) = tr.eta_increment(zc, zc + delta, sq_c);
            zc += delta;
            eta_c += de2;
            sq_c = sq2;
        }
        if (sq_c - sq).norm() > 1.5 * (sq_c.norm() + sq.norm()) {
            return Err(QdError::BranchLost(zc));
        }
        dir = dnew;
        z = zc;
        eta = eta_c;
        sq = sq_c;
        samples.push(z);
        etas.push(eta);

        if half_point.is_none() && z.norm() > 0.5 * opts.rmax {
            half_point = Some(z);
        }
        if z.norm() > opts.rmax {
            let angle = asymptotic_angle(half_point.unwrap_or(z), z);
            terminal = Terminal::Asymptotic { angle };
            break;
        }
        if qd.denom_power > 0 && z.norm() < opts.pole_guard {
            terminal = Terminal::Stopped;
            break;
        }
        if let Some(stop) = &opts.stop {
            if stop(z) {
                terminal = Terminal::Stopped;
                break;
            }
        }
        if !left_seed && (z - p).norm() > 1e-3 * scale {
            left_seed = true;
        }
        // arrival at another critical point
        let mut hit = None;
        for (i, q) in qd.critical.iter().enumerate() {
            let d = (z - q.z).norm();
            if i == seed && !left_seed {
                continue;
            }
            if d < 1e-6 * scale {
                hit = Some(i);
                break;
            }
            if d < 1e-4 * scale {
                let eq = eta + tr.eta_to_point(z, q.z, sq);
                let lvl = match kind {
                    TrajectoryKind::Critical => eq.re - target,
                    TrajectoryKind::Orthogonal => eq.im - target,
                };
                if lvl.abs() < 1e-7 * scale.max(1.0) {
                    hit = Some(i);
                    break;
                }
            }
        }
        if let Some(i) = hit {
            let q = qd.critical[i].z;
            let eq = eta + tr.eta_to_point(z, q, sq);
            samples.push(q);
            etas.push(eq);
            terminal = Terminal::HitsCriticalPoint { index: i };
            break;
        }
    }
    Ok(Trajectory {
        samples,
        eta: etas,
        seed_index: seed,
        seed_point: p,
        seed_direction_index: dir_index,
        seed_angle: theta,
        kind,
        terminal,
    })
}

/// Asymptotic direction from two far samples, removing the `1/r²` term.
fn asymptotic_angle(near: C64, far: C64) -> f64 {
    let (r1, r2) = (near.norm(), far.norm());
    let t1 = near.arg();
    let mut t2 = far.arg();
    while t2 - t1 > std::f64::consts::PI {
        t2 -= 2.0 * std::f64::consts::PI;
    }
    while t1 - t2 > std::f64::consts::PI {
        t2 += 2.0 * std::f64::consts::PI;
    }
    let est = if (r2 - r1).abs() > 1e-9 { (r2 * r2 * t2 - r1 * r1 * t1) / (r2 * r2 - r1 * r1) } else { t2 };
    est.rem_euclid(2.0 * std::f64::consts::PI)
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct CriticalGraph {
    pub trajectories: Vec<Trajectory>,
    /// Unordered pairs of critical-point indices joined by a trajectory.
    pub connections: Vec<(usize, usize)>,
    /// Asymptotic angles in `[0, 2π)`, one per trajectory reaching `rmax`.
    pub census: Vec<f64>,
    pub rmax: f64,
    pub critical: Vec<CriticalPoint>,
}

impl CriticalGraph {
    pub fn connects(&self, p: C64, q: C64, tol: f64) -> bool {
        self.connections.iter().any(|&(i, j)| {
            let (a, b) = (self.critical[i].z, self.critical[j].z);
            ((a - p).norm() < tol && (b - q).norm() < tol) || ((a - q).norm() < tol && (b - p).norm() < tol)
        })
    }

    /// The trajectory from `p` ending at `q`, if traced.
    pub fn arc(&self, p: C64, q: C64, tol: f64) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| {
            matches!(t.terminal, Terminal::HitsCriticalPoint { index } if (self.critical[index].z - q).norm() < tol)
                && (t.seed_point - p).norm() < tol
        })
    }

    /// Census bins: asymptotic angles rounded to the nearest `π/8 + kπ/4`.
    pub fn census_bins(&self) -> [usize; 8] {
        let mut bins = [0; 8];
        for &a in &self.census {
            bins[nearest_direction(a).0] += 1;
        }
        bins
    }

    /// Largest distance of a census angle from its nearest `π/8 + kπ/4`.
    pub fn census_error(&self) -> f64 {
        self.census.iter().map(|&a| nearest_direction(a).1).fold(0.0, f64::max)
    }

    /// Largest distance from a negated sample to the mirrored trajectory.
    pub fn symmetry_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for t in &self.trajectories {
            let mirror = self.trajectories.iter().find(|u| {
                (u.seed_point + t.seed_point).norm() < 1e-9 * (1.0 + t.seed_point.norm())
                    && angle_gap(u.seed_angle, t.seed_angle + std::f64::consts::PI) < 1e-6
            });
            let Some(u) = mirror else {
                return f64::INFINITY;
            };
            if u.samples.len() == t.samples.len() {
                for (a, b) in t.samples.iter().zip(&u.samples) {
                    worst = worst.max((a + b).norm());
                }
            } else {
                for a in &t.samples {
                    worst = worst.max(dist_to_polyline(-a, &u.samples));
                }
            }
        }
        worst
    }

    /// Trajectories whose conserved level equals that of a point with
    /// `Re η = 0`, i.e. those issuing from the listed seeds.
    pub fn from_seeds<'a>(&'a self, seeds: &'a [usize]) -> impl Iterator<Item = &'a Trajectory> + 'a {
        self.trajectories.iter().filter(move |t| seeds.contains(&t.seed_index))
    }
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * std::f64::consts::PI);
    d.min(2.0 * std::f64::consts::PI - d)
}

/// Index `k` and distance of the direction `π/8 + kπ/4` nearest to `a`.
pub fn nearest_direction(a: f64) -> (usize, f64) {
    let step = std::f64::consts::FRAC_PI_4;
    let k = ((a - step / 2.0) / step).round().rem_euclid(8.0) as usize;
    let center = step / 2.0 + step * k as f64;
    (k, angle_gap(a, center))
}

/// Trace every seeded direction at the listed critical points.
pub fn critical_graph_from(qd: &QuadraticDifferential, seeds: &[usize], opts: &TraceOptions) -> Result<CriticalGraph, QdError> {
    let jobs: Vec<(usize, usize)> = seeds
        .iter()
        .flat_map(|&i| (0..qd.critical[i].order as usize + 2).map(move |k| (i, k)))
        .collect();
    let trajectories = jobs
        .par_iter()
        .map(|&(i, k)| trace(qd, i, k, TrajectoryKind::Critical, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut connections = Vec::new();
    let mut census = Vec::new();
    for t in &trajectories {
        match t.terminal {
            Terminal::HitsCriticalPoint { index } => {
                let pair = (t.seed_index.min(index), t.seed_index.max(index));
                if !connections.contains(&pair) {
                    connections.push(pair);
                }
            }
            Terminal::Asymptotic { angle } => census.push(angle),
            _ => {}
        }
    }
    connections.sort();
    Ok(CriticalGraph { trajectories, connections, census, rmax: opts.rmax, critical: qd.critical.clone() })
}

/// Trace from every critical point.
pub fn critical_graph(qd: &QuadraticDifferential) -> Result<CriticalGraph, QdError> {
    let seeds: Vec<usize> = (0..qd.critical.len()).collect();
    critical_graph_from(qd, &seeds, &TraceOptions::default())
}

/// `−1` where `Re η < 0` (stable), `+1` where `Re η > 0`.
pub fn stable_sign(sigma: SigmaPoint, z: C64, regime: PhaseRegime) -> Result<i8, QdError> {
    let lands = crate::gfunction::Lands::new(sigma, regime)?;
    lands.sign(z)
}

/// Connected components of a grid under 4-adjacency, where two neighbours
/// are joined unless the segment between their centres crosses a barrier
/// polyline. Returns the component label of every cell (row-major).
pub fn flood_fill(
    origin: C64,
    spacing: f64,
    nx: usize,
    ny: usize,
    barriers: &[&[C64]],
) -> Vec<usize> {
    use crate::numeric::segments_cross;
    let at = |i: usize, j: usize| origin + C64::new(i as f64 * spacing, j as f64 * spacing);
    // bucket barrier segments by cell for fast crossing queries
    let mut buckets: Vec<Vec<(C64, C64)>> = vec![Vec::new(); nx * ny];
    for poly in barriers {
        for w in poly.windows(2) {
            let (p, q) = (w[0], w[1]);
            let lo = (p.re.min(q.re), p.im.min(q.im));
            let hi = (p.re.max(q.re), p.im.max(q.im));
            let i0 = (((lo.0 - origin.re) / spacing).floor() as i64 - 1).max(0) as usize;
            let j0 = (((lo.1 - origin.im) / spacing).floor() as i64 - 1).max(0) as usize;
            let i1 = ((((hi.0 - origin.re) / spacing).ceil() as i64 + 1).max(0) as usize).min(nx.saturating_sub(1));
            let j1 = ((((hi.1 - origin.im) / spacing).ceil() as i64 + 1).max(0) as usize).min(ny.saturating_sub(1));
            if i0 >= nx || j0 >= ny {
                continue;
            }
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * nx + i].push((p, q));
                }
            }
        }
    }
    let blocked = |i: usize, j: usize, i2: usize, j2: usize| {
        let (a, b) = (at(i, j), at(i2, j2));
        buckets[j * nx + i].iter().any(|&(p, q)| segments_cross(a, b, p, q))
    };
    let mut label = vec![usize::MAX; nx * ny];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..nx * ny {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        stack.push(start);
        while let Some(c) = stack.pop() {
            let (i, j) = (c % nx, c / nx);
            let mut nb = Vec::with_capacity(4);
            if i + 1 < nx {
                nb.push((i + 1, j));
            }
            if i > 0 {
                nb.push((i - 1, j));
            }
            if j + 1 < ny {
                nb.push((i, j + 1));
            }
            if j > 0 {
                nb.push((i, j - 1));
            }
            for (i2, j2) in nb {
                let c2 = j2 * nx + i2;
                if label[c2] == usize::MAX && !blocked(i, j, i2, j2) && !blocked(i2, j2, i, j) {
                    label[c2] = next;
                    stack.push(c2);
                }
            }
        }
        next += 1;
    }
    label
}

/// CSV with one row per sample:
/// `trajectory,seed_re,seed_im,direction,kind,terminal,index,re,im`.
pub fn write_csv<W: Write>(graph: &CriticalGraph, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trajectory", "seed_re", "seed_im", "direction", "kind", "terminal", "index", "re", "im"])?;
    for (ti, t) in graph.trajectories.iter().enumerate() {
        let kind = match t.kind {
            TrajectoryKind::Critical => "critical",
            TrajectoryKind::Orthogonal => "orthogonal",
        };
        let term = t.terminal.label();
        for (si, z) in t.samples.iter().enumerate() {
            w.write_record(&[
                ti.to_string(),
                format!("{:.17e}", t.seed_point.re),
                format!("{:.17e}", t.seed_point.im),
                t.seed_direction_index.to_string(),
                kind.to_string(),
                term.clone(),
                si.to_string(),
                format!("{:.17e}", z.re),
                format!("{:.17e}", z.im),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// SVG drawing of the trajectories over the square `[-r, r]²`, with cells
/// where `shade` returns true filled.
pub fn to_svg(graph: &CriticalGraph, r: f64, shade: Option<&(dyn Fn(C64) -> bool + Sync)>) -> String {
    let size = 600.0;
    let px = |z: C64| ((z.re + r) / (2.0 * r) * size, (r - z.im) / (2.0 * r) * size);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    if let Some(f) = shade {
        let n = 150;
        let cell = size / n as f64;
        let cells: Vec<(usize, usize)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let z = C64::new(-r + (i as f64 + 0.5) * 2.0 * r / n as f64, r - (j as f64 + 0.5) * 2.0 * r / n as f64);
                f(z)
            })
            .collect();
        for (i, j) in cells {
            let _ = writeln!(
                s,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#d8e6f5\"/>",
                i as f64 * cell,
                j as f64 * cell,
                cell + 0.3,
                cell + 0.3
            );
        }
    }
    for t in &graph.trajectories {
        let pts: Vec<String> = t
            .samples
            .iter()
            .filter(|z| z.re.abs() <= 1.2 * r && z.im.abs() <= 1.2 * r)
            .map(|&z| {
                let (x, y) = px(z);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let color = match t.terminal {
            Terminal::HitsCriticalPoint { .. } => "#c0392b",
            _ => "#1f3a5f",
        };
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>", pts.join(" "));
    }
    for c in &graph.critical {
        let (x, y) = px(c.z);
        let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"black\"/>");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(re: f64, im: f64) -> SigmaPoint {
        SigmaPoint::new(re, im).unwrap()
    }

    fn approx_poly(a: &[C64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, &y)| (x - C64::new(y, 0.0)).norm() < 1e-12)
    }

    #[test]
    fn regime_polynomials() {
        let q = build_qd(sp(-2.0, 0.0), PhaseRegime::OneCut).unwrap();
        assert!(approx_poly(&q.numer, &[0.0, 0.0, 0.0, 0.0, -4.0, 0.0, 1.0]));
        assert_eq!(q.critical.iter().find(|c| c.z.norm() < 1e-9).unwrap().order, 4);
        let q = build_qd(sp(-3.0, 0.0), PhaseRegime::TwoCut).unwrap();
        // z²(z²−1)(z²−5) = z⁶ − 6z⁴ + 5z²
        assert!(approx_poly(&q.numer, &[0.0, 0.0, 5.0, 0.0, -6.0, 0.0, 1.0]));
    }

    #[test]
    fn seeds_are_equally_spaced() {
        let q = build_qd(sp(0.3, 0.7), PhaseRegime::OneCut).unwrap();
        for (i, c) in q.critical.iter().enumerate() {
            let mut a = q.seed_angles(i, TrajectoryKind::Critical);
            a.sort_by(f64::total_cmp);
            let n = c.order as usize + 2;
            let gap = 2.0 * std::f64::consts::PI / n as f64;
            for k in 0..n {
                let next = if k + 1 < n { a[k + 1] } else { a[0] + 2.0 * std::f64::consts::PI };
                assert!((next - a[k] - gap).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn real_support_for_sigma_one() {
        let q = build_qd(sp(1.0, 0.0), PhaseRegime::OneCut).unwrap();
        let angles = q.seed_angles(0, TrajectoryKind::Critical);
        let k = angles.iter().position(|&a| (a - std::f64::consts::PI).abs() < 1e-6).unwrap();
        let t = trace(&q, 0, k, TrajectoryKind::Critical, &TraceOptions::default()).unwrap();
        assert_eq!(t.terminal, Terminal::HitsCriticalPoint { index: 1 });
        assert!(t.samples.iter().all(|z| z.im.abs() < 1e-8));
        assert!(t.level_drift() < 1e-9);
        let others: Vec<f64> = (0..3)
            .filter(|&j| j != k)
            .map(|j| match trace(&q, 0, j, TrajectoryKind::Critical, &TraceOptions::default()).unwrap().terminal {
                Terminal::Asymptotic { angle } => angle,
                other => panic!("{other:?}"),
            })
            .collect();
        let pi8 = std::f64::consts::PI / 8.0;
        assert!(others.iter().any(|&a| angle_gap(a, pi8) < 1e-3));
        assert!(others.iter().any(|&a| angle_gap(a, -pi8) < 1e-3));
    }

    #[test]
    fn orthogonal_level_is_conserved() {
        let q = build_qd(sp(1.0, 0.0), PhaseRegime::OneCut).unwrap();
        for k in 0..3 {
            let t = trace(&q, 0, k, TrajectoryKind::Orthogonal, &TraceOptions::default()).unwrap();
            assert!(t.level_drift() < 1e-9, "{}", t.level_drift());
        }
    }

    #[test]
    fn one_cut_graph() {
        let q = build_qd(sp(1.0, 0.0), PhaseRegime::OneCut).unwrap();
        let g = critical_graph(&q).unwrap();
        assert!(g.connects(q.critical[0].z, q.critical[1].z, 1e-9));
        assert!(g.census_error() < 1e-3, "{}", g.census_error());
        assert!(g.census_bins().iter().all(|&c| c > 0), "{:?}", g.census_bins());
        assert!(g.symmetry_error() < 1e-6);
    }

    #[test]
    fn two_cut_graph() {
        let q = build_qd(sp(-3.0, 0.0), PhaseRegime::TwoCut).unwrap();
        let g = critical_graph(&q).unwrap();
        let (b, a) = (q.critical[0].z, q.critical[2].z);
        assert!(g.connects(a, b, 1e-9));
        assert!(g.connects(-a, -b, 1e-9));
        assert!(g.census_bins().iter().all(|&c| c > 0), "{:?}", g.census_bins());
        assert!(g.census_error() < 1e-3);
    }

    #[test]
    fn flood_fill_splits_on_barrier() {
        let wall = [C64::new(0.5, -1.0), C64::new(0.5, 2.0)];
        let lab = flood_fill(C64::new(0.0, 0.0), 0.1, 10, 10, &[&wall]);
        assert_ne!(lab[0], lab[9]);
        assert_eq!(lab[0], lab[90]);
    }
}
