//! The σ-plane phase diagram: the level functions Ψ and Φ, the auxiliary
//! quadratic differentials Ξ(β)dβ² and Υ(σ)dσ², the Joukowski map, traced
//! boundary curves and the classifier built on them.

use std::fmt;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::endpoints::{one_cut, three_cut, two_cut, EndpointError};
use crate::gfunction::Lands;
use crate::model::{multicritical_anchor, Anchor, BranchConvention, Gamma, PhaseRegime, SigmaPoint, C64, SQRT12};
use crate::numeric::{dist_to_polyline, segments_cross};
use crate::quaddiff::{
    critical_graph_from, flood_fill, trace, CriticalPoint, QdError, QuadraticDifferential, Terminal, TraceOptions,
    TrajectoryKind,
};

/// Environment variable naming a directory for the traced-boundary cache.
pub const CACHE_DIR_ENV: &str = "QUARTIC_CACHE_DIR";
const CACHE_FILE: &str = "boundaries-v1.json";
/// Traced curves stop at this |σ| and continue as rays.
pub const TRACE_RADIUS: f64 = 40.0;
/// Distance below which a point is reported on a boundary.
pub const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum PhaseError {
    #[error("σ = {0} lies on a branch cut")]
    OnBranchCut(C64),
    #[error("Ξ has a pole at β = 0")]
    PoleAtZero,
    #[error("β = 0 has no Joukowski image")]
    ZeroBeta,
    #[error("unknown curve {0:?}")]
    InvalidCurve(String),
    #[error("tracing {curve} failed: {detail}")]
    TraceFailed { curve: String, detail: String },
    #[error("σ = {sigma}: located as {claimed} but {detail}")]
    VerificationMismatch { sigma: SigmaPoint, claimed: PhaseRegime, detail: String },
    #[error(transparent)]
    Qd(#[from] QdError),
    #[error(transparent)]
    Endpoints(#[from] EndpointError),
    #[error("boundary cache: {0}")]
    Cache(String),
}

/// `Ψ(σ) = −(σ/4)·z0·√(z0²−b1²) + 2 log((z0 + √(z0²−b1²))/b1)`, the value
/// of `η₁` at `z0`; a one-cut/three-cut transition needs `Re Ψ = 0`.
pub fn psi(sigma: SigmaPoint) -> Result<C64, PhaseError> {
    let s = sigma.c();
    if matches!(multicritical_anchor(s, 0.0), Some(Anchor::PlusISqrt12 | Anchor::MinusISqrt12)) {
        return Ok(C64::new(0.0, 0.0));
    }
    let e = one_cut(sigma, 1.0).map_err(|_| PhaseError::OnBranchCut(s))?;
    let (b1, z0) = (e.b1, e.z0);
    let one = C64::new(1.0, 0.0);
    let rr = z0 * (one - b1 * b1 / (z0 * z0)).sqrt();
    Ok(-s / 4.0 * z0 * rr + 2.0 * ((z0 + rr) / b1).ln())
}

/// `√(σ²−4)` written as `σ√(1−4/σ²)`: cut on `[−2, 2]`, limit from above there.
fn sqrt_sigma2_minus4(s: C64) -> C64 {
    if s.im == 0.0 && s.re.abs() < 2.0 {
        return C64::new(0.0, (4.0 - s.re * s.re).sqrt());
    }
    s * (C64::new(1.0, 0.0) - 4.0 / (s * s)).sqrt()
}

/// `Φ(σ) = −σ√(σ²−4)/4 + log((σ + √(σ²−4))/2)`, with `Φ(2) = 0`; the value of
/// `η₂` at the origin, so a two-cut/three-cut transition needs `Re Φ = 0`.
pub fn phi(sigma: SigmaPoint) -> C64 {
    let s = sigma.c();
    let t = sqrt_sigma2_minus4(s);
    -s * t / 4.0 + ((s + t) / 2.0).ln()
}

/// `Ξ(β) = (16−β²)(16+3β²)³/(1024β⁶)`.
pub fn xi(beta: C64) -> Result<C64, PhaseError> {
    if beta == C64::new(0.0, 0.0) {
        return Err(PhaseError::PoleAtZero);
    }
    let b2 = beta * beta;
    let f = C64::new(16.0, 0.0) + 3.0 * b2;
    Ok((C64::new(16.0, 0.0) - b2) * f * f * f / (1024.0 * b2 * b2 * b2))
}

/// `Υ(σ) = σ²/4 − 1`.
pub fn upsilon(sigma: C64) -> C64 {
    sigma * sigma / 4.0 - 1.0
}

/// `σ = −3β/4 + 4/β`.
pub fn joukowski(beta: C64) -> Result<C64, PhaseError> {
    if beta == C64::new(0.0, 0.0) {
        return Err(PhaseError::ZeroBeta);
    }
    Ok(-0.75 * beta + 4.0 / beta)
}

/// The two preimages `β^{(±)} = (2/3)(−σ ± √(12+σ²))`, the root taken with
/// cuts on the horizontal rays from `±i√12` to the left.
pub fn inverse_joukowski(sigma: C64) -> (C64, C64) {
    let r = BranchConvention::sqrt_12k_plus_sigma2(sigma, 1.0);
    ((2.0 / 3.0) * (-sigma + r), (2.0 / 3.0) * (-sigma - r))
}

/// `Ξ(β)dβ²` as a quadratic differential: zeros `4`, `−4` (simple) and
/// `±4i/√3` (triple), pole of order six at the origin.
pub fn xi_qd() -> QuadraticDifferential {
    // (16 − b²)(16 + 3b²)³ / 1024 in ascending powers of β
    let cube = [4096.0, 0.0, 2304.0, 0.0, 432.0, 0.0, 27.0];
    let mut numer = vec![C64::new(0.0, 0.0); 9];
    for (k, &c) in cube.iter().enumerate() {
        numer[k] += C64::new(16.0 * c / 1024.0, 0.0);
        numer[k + 2] -= C64::new(c / 1024.0, 0.0);
    }
    let r = 4.0 / 3f64.sqrt();
    QuadraticDifferential::new(
        "Xi",
        numer,
        6,
        vec![
            CriticalPoint { z: C64::new(4.0, 0.0), order: 1 },
            CriticalPoint { z: C64::new(-4.0, 0.0), order: 1 },
            CriticalPoint { z: C64::new(0.0, r), order: 3 },
            CriticalPoint { z: C64::new(0.0, -r), order: 3 },
        ],
    )
}

/// `Υ(σ)dσ²` with simple zeros at `±2`.
pub fn upsilon_qd() -> QuadraticDifferential {
    QuadraticDifferential::new(
        "Upsilon",
        vec![C64::new(-1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.25, 0.0)],
        0,
        vec![CriticalPoint { z: C64::new(2.0, 0.0), order: 1 }, CriticalPoint { z: C64::new(-2.0, 0.0), order: 1 }],
    )
}

/// Traced curves: the six phase boundaries and the sign changes of `Re Ψ`
/// that are not boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveId {
    Gamma(Gamma),
    VI,
    VIII,
    XI,
}

impl CurveId {
    pub const ALL: [CurveId; 9] = [
        CurveId::Gamma(Gamma::G1),
        CurveId::Gamma(Gamma::G2),
        CurveId::Gamma(Gamma::G3),
        CurveId::Gamma(Gamma::G4),
        CurveId::Gamma(Gamma::G5),
        CurveId::Gamma(Gamma::G6),
        CurveId::VI,
        CurveId::VIII,
        CurveId::XI,
    ];

    /// Whether the classifier treats the curve as a phase boundary.
    pub fn is_boundary(self) -> bool {
        matches!(self, CurveId::Gamma(_))
    }

    /// Component label in the auxiliary pictures: γ1–γ4 are I, VII, XII, IX
    /// in the Ξ-image, γ5 and γ6 are the Υ-trajectories 1 and 2.
    pub fn component_label(self) -> &'static str {
        match self {
            CurveId::Gamma(Gamma::G1) => "I",
            CurveId::Gamma(Gamma::G2) => "XII",
            CurveId::Gamma(Gamma::G3) => "VII",
            CurveId::Gamma(Gamma::G4) => "IX",
            CurveId::Gamma(Gamma::G5) => "1",
            CurveId::Gamma(Gamma::G6) => "2",
            CurveId::VI => "VI",
            CurveId::VIII => "VIII",
            CurveId::XI => "XI",
        }
    }

    pub fn parse(s: &str) -> Option<CurveId> {
        if let Some(g) = Gamma::parse(s) {
            return Some(CurveId::Gamma(g));
        }
        CurveId::ALL.into_iter().find(|c| c.component_label() == s || c.to_string() == s)
    }

    pub fn conj(self) -> CurveId {
        match self {
            CurveId::Gamma(g) => CurveId::Gamma(g.conj()),
            CurveId::VI => CurveId::VIII,
            CurveId::VIII => CurveId::VI,
            CurveId::XI => CurveId::XI,
        }
    }

    /// Which level function vanishes along the curve.
    pub fn level(self) -> Level {
        match self {
            CurveId::Gamma(Gamma::G5 | Gamma::G6) => Level::Phi,
            _ => Level::Psi,
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveId::Gamma(g) => write!(f, "{g}"),
            other => f.write_str(other.component_label()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Psi,
    Phi,
}

impl Level {
    pub fn re(self, sigma: SigmaPoint) -> Result<f64, PhaseError> {
        Ok(match self {
            Level::Psi => psi(sigma)?.re,
            Level::Phi => phi(sigma).re,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub id: CurveId,
    pub boundary: bool,
    /// Samples from the anchor outward (γ1 and γ2 run from −2 to ±i√12).
    pub points: Vec<SigmaPoint>,
    pub anchors: Vec<Anchor>,
    /// Direction of approach to infinity, when the curve is unbounded.
    pub asymptotic_angle: Option<f64>,
}

impl BoundaryCurve {
    fn polyline(&self) -> Vec<C64> {
        self.points.iter().map(|p| p.c()).collect()
    }

    /// The polyline continued by a long ray along the asymptotic direction.
    pub fn extended(&self) -> Vec<C64> {
        let mut v = self.polyline();
        if let (Some(a), Some(&last)) = (self.asymptotic_angle, v.last()) {
            v.push(last + C64::from_polar(1e7, a));
        }
        v
    }

    pub fn conj(&self) -> BoundaryCurve {
        BoundaryCurve {
            id: self.id.conj(),
            boundary: self.boundary,
            points: self.points.iter().map(|p| p.conj()).collect(),
            anchors: self
                .anchors
                .iter()
                .map(|a| match a {
                    Anchor::PlusISqrt12 => Anchor::MinusISqrt12,
                    Anchor::MinusISqrt12 => Anchor::PlusISqrt12,
                    Anchor::MinusTwo => Anchor::MinusTwo,
                })
                .collect(),
            asymptotic_angle: self.asymptotic_angle.map(|a| (-a).rem_euclid(2.0 * std::f64::consts::PI)),
        }
    }

    /// Largest `|Re Ψ|` or `|Re Φ|` over the samples.
    pub fn level_error(&self) -> Result<f64, PhaseError> {
        let level = self.id.level();
        let mut worst: f64 = 0.0;
        for &p in &self.points {
            match level.re(p) {
                Ok(v) => worst = worst.max(v.abs()),
                Err(PhaseError::OnBranchCut(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(worst)
    }
}

/// σ-spacing of traced samples: fine near the anchors, coarser far out.
fn sigma_spacing(s: C64) -> f64 {
    if s.norm() < 10.0 {
        1e-3
    } else {
        1e-2
    }
}

fn beta_trace_options() -> TraceOptions {
    let step: Arc<dyn Fn(C64) -> f64 + Send + Sync> = Arc::new(|b: C64| {
        let s = -0.75 * b + 4.0 / b;
        let ds = (C64::new(-0.75, 0.0) - 4.0 / (b * b)).norm();
        sigma_spacing(s) / ds.max(1e-12)
    });
    let stop: Arc<dyn Fn(C64) -> bool + Send + Sync> = Arc::new(|b: C64| (-0.75 * b + 4.0 / b).norm() > TRACE_RADIUS);
    TraceOptions { rmax: 200.0, max_steps: 1_000_000, step_limit: Some(step), stop: Some(stop), ..TraceOptions::default() }
}

fn sigma_trace_options() -> TraceOptions {
    let step: Arc<dyn Fn(C64) -> f64 + Send + Sync> = Arc::new(sigma_spacing);
    TraceOptions { rmax: TRACE_RADIUS, max_steps: 1_000_000, step_limit: Some(step), ..TraceOptions::default() }
}

/// Direction of a σ-polyline at infinity, from its samples at radii
/// `R/2` and `R` with the `1/r²` correction removed.
fn far_angle(pts: &[C64]) -> Option<f64> {
    let far = *pts.last()?;
    let r = far.norm();
    let near = *pts.iter().find(|p| p.norm() >= 0.5 * r)?;
    let (r1, r2) = (near.norm(), r);
    let t1 = near.arg();
    let mut t2 = far.arg();
    while t2 - t1 > std::f64::consts::PI {
        t2 -= 2.0 * std::f64::consts::PI;
    }
    while t1 - t2 > std::f64::consts::PI {
        t2 += 2.0 * std::f64::consts::PI;
    }
    Some(((r2 * r2 * t2 - r1 * r1 * t1) / (r2 * r2 - r1 * r1)).rem_euclid(2.0 * std::f64::consts::PI))
}

fn to_sigma_points(pts: &[C64]) -> Vec<SigmaPoint> {
    pts.iter().map(|&s| SigmaPoint::from_c(s).expect("finite sample")).collect()
}

/// Trace one of the upper-half-plane curves from scratch.
fn trace_upper(id: CurveId) -> Result<BoundaryCurve, PhaseError> {
    let fail = |detail: String| PhaseError::TraceFailed { curve: id.to_string(), detail };
    match id {
        CurveId::Gamma(Gamma::G1) | CurveId::Gamma(Gamma::G3) | CurveId::VI => {
            let qd = xi_qd();
            let opts = beta_trace_options();
            // the zero −4i/√3 maps to +i√12
            let seed = 3;
            let all: Vec<_> = (0..5)
                .into_par_iter()
                .map(|k| trace(&qd, seed, k, TrajectoryKind::Critical, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            let consistent = |t: &&crate::quaddiff::Trajectory| {
                t.samples.iter().skip(1).step_by(97).all(|&b| {
                    let s = -0.75 * b + 4.0 / b;
                    (inverse_joukowski(s).0 - b).norm() < 1e-6 * (1.0 + b.norm())
                })
            };
            if id == CurveId::Gamma(Gamma::G1) {
                let t = all
                    .iter()
                    .filter(consistent)
                    .find(|t| t.terminal == Terminal::HitsCriticalPoint { index: 0 })
                    .ok_or_else(|| fail("no trajectory joins −4i/√3 to 4".into()))?;
                let mut pts: Vec<C64> = t.samples.iter().map(|&b| -0.75 * b + 4.0 / b).collect();
                pts.reverse();
                pts[0] = C64::new(-2.0, 0.0);
                *pts.last_mut().expect("nonempty") = C64::new(0.0, SQRT12);
                return Ok(BoundaryCurve {
                    id,
                    boundary: true,
                    points: to_sigma_points(&pts),
                    anchors: vec![Anchor::MinusTwo, Anchor::PlusISqrt12],
                    asymptotic_angle: None,
                });
            }
            let mut legs: Vec<(f64, Vec<C64>)> = all
                .iter()
                .filter(consistent)
                .filter(|t| t.terminal == Terminal::Stopped)
                .map(|t| {
                    let mut pts: Vec<C64> = t.samples.iter().map(|&b| -0.75 * b + 4.0 / b).collect();
                    pts[0] = C64::new(0.0, SQRT12);
                    (far_angle(&pts).unwrap_or(0.0), pts)
                })
                .collect();
            if legs.len() != 2 {
                return Err(fail(format!("expected two legs to infinity, found {}", legs.len())));
            }
            // γ3 is the leg heading towards 3π/4, the fake one towards π/4
            let target = 0.75 * std::f64::consts::PI;
            legs.sort_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()));
            let (angle, pts) = if id == CurveId::VI { legs.swap_remove(1) } else { legs.swap_remove(0) };
            Ok(BoundaryCurve {
                id,
                boundary: id.is_boundary(),
                points: to_sigma_points(&pts),
                anchors: vec![Anchor::PlusISqrt12],
                asymptotic_angle: Some(angle),
            })
        }
        CurveId::XI => {
            let qd = xi_qd();
            let opts = beta_trace_options();
            let angles = qd.seed_angles(0, TrajectoryKind::Critical);
            let k = angles
                .iter()
                .position(|a| a.min(2.0 * std::f64::consts::PI - a) < 1e-6)
                .ok_or_else(|| fail("no real direction at β = 4".into()))?;
            let t = trace(&qd, 0, k, TrajectoryKind::Critical, &opts)?;
            let mut pts: Vec<C64> = t.samples.iter().map(|&b| C64::new((-0.75 * b + 4.0 / b).re, 0.0)).collect();
            pts[0] = C64::new(-2.0, 0.0);
            Ok(BoundaryCurve {
                id,
                boundary: false,
                points: to_sigma_points(&pts),
                anchors: vec![Anchor::MinusTwo],
                asymptotic_angle: Some(std::f64::consts::PI),
            })
        }
        CurveId::Gamma(Gamma::G5) => {
            let qd = upsilon_qd();
            let opts = sigma_trace_options();
            let legs = (0..3)
                .map(|k| trace(&qd, 1, k, TrajectoryKind::Critical, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            let t = legs
                .into_iter()
                .find(|t| matches!(t.terminal, Terminal::Asymptotic { .. }) && t.samples[t.samples.len() / 2].im > 0.0)
                .ok_or_else(|| fail("no Υ-trajectory from −2 into the upper half plane".into()))?;
            let angle = match t.terminal {
                Terminal::Asymptotic { angle } => angle,
                _ => unreachable!(),
            };
            let mut pts = t.samples.clone();
            pts[0] = C64::new(-2.0, 0.0);
            Ok(BoundaryCurve {
                id,
                boundary: true,
                points: to_sigma_points(&pts),
                anchors: vec![Anchor::MinusTwo],
                asymptotic_angle: Some(angle),
            })
        }
        other => Err(PhaseError::InvalidCurve(other.to_string())),
    }
}

/// Trace a curve; lower-half-plane curves are mirror images.
pub fn trace_boundary(id: CurveId) -> Result<BoundaryCurve, PhaseError> {
    match id {
        CurveId::Gamma(Gamma::G2) | CurveId::Gamma(Gamma::G4) | CurveId::Gamma(Gamma::G6) | CurveId::VIII => {
            Ok(trace_upper(id.conj())?.conj())
        }
        _ => trace_upper(id),
    }
}

/// All traced curves, ready for point location.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundarySet {
    pub curves: Vec<BoundaryCurve>,
    #[serde(skip)]
    index: OnceLock<Vec<ChunkedPolyline>>,
}

/// Polyline split into runs of segments, each with its bounding box, so
/// distance and crossing queries can skip distant runs.
#[derive(Clone, Debug)]
struct ChunkedPolyline {
    pts: Vec<C64>,
    /// `(first vertex, last vertex, [min re, max re, min im, max im])`
    runs: Vec<(usize, usize, [f64; 4])>,
}

impl ChunkedPolyline {
    const RUN: usize = 32;

    fn new(pts: Vec<C64>) -> Self {
        let mut runs = Vec::new();
        let mut i = 0;
        while i + 1 < pts.len() {
            let j = (i + Self::RUN).min(pts.len() - 1);
            let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
            for p in &pts[i..=j] {
                b = [b[0].min(p.re), b[1].max(p.re), b[2].min(p.im), b[3].max(p.im)];
            }
            runs.push((i, j, b));
            i = j;
        }
        ChunkedPolyline { pts, runs }
    }

    fn distance(&self, z: C64) -> f64 {
        if self.runs.is_empty() {
            return dist_to_polyline(z, &self.pts);
        }
        let mut best = f64::INFINITY;
        for &(i, j, b) in &self.runs {
            let dx = (b[0] - z.re).max(z.re - b[1]).max(0.0);
            let dy = (b[2] - z.im).max(z.im - b[3]).max(0.0);
            if dx.hypot(dy) < best {
                best = best.min(dist_to_polyline(z, &self.pts[i..=j]));
            }
        }
        best
    }

    /// Number of crossings with the vertical segment from `s` down to its
    /// real-axis foot.
    fn drop_crossings(&self, s: C64) -> usize {
        let foot = C64::new(s.re, 0.0);
        let (lo, hi) = (s.im.min(0.0), s.im.max(0.0));
        self.runs
            .iter()
            .filter(|(_, _, b)| b[0] <= s.re && s.re <= b[1] && b[2] <= hi && lo <= b[3])
            .map(|&(i, j, _)| self.pts[i..=j].windows(2).filter(|w| segments_cross(s, foot, w[0], w[1])).count())
            .sum()
    }
}

impl BoundarySet {
    pub fn trace_all() -> Result<BoundarySet, PhaseError> {
        let upper = [CurveId::Gamma(Gamma::G1), CurveId::Gamma(Gamma::G3), CurveId::Gamma(Gamma::G5), CurveId::VI];
        let traced = upper.par_iter().map(|&id| trace_upper(id)).collect::<Result<Vec<_>, _>>()?;
        let mut curves = Vec::new();
        for c in traced {
            let m = c.conj();
            curves.push(c);
            curves.push(m);
        }
        curves.push(trace_upper(CurveId::XI)?);
        curves.sort_by_key(|c| CurveId::ALL.iter().position(|&i| i == c.id));
        Ok(BoundarySet { curves, index: OnceLock::new() })
    }

    fn indexed(&self, id: CurveId) -> &ChunkedPolyline {
        let index = self.index.get_or_init(|| self.curves.iter().map(|c| ChunkedPolyline::new(c.extended())).collect());
        let k = self.curves.iter().position(|c| c.id == id).expect("every curve is traced");
        &index[k]
    }

    pub fn get(&self, id: CurveId) -> &BoundaryCurve {
        self.curves.iter().find(|c| c.id == id).expect("every curve is traced")
    }

    /// Nearest boundary curve and its distance.
    pub fn nearest_boundary(&self, sigma: C64) -> (CurveId, f64) {
        self.curves
            .iter()
            .filter(|c| c.boundary)
            .map(|c| (c.id, self.indexed(c.id).distance(sigma)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("boundaries exist")
    }

    /// Parity of the crossings of the vertical drop from `s` to the real
    /// axis with the curves, counting the real ray `(−∞, −2]` as well.
    fn left_of(&self, s: C64, ids: &[CurveId]) -> bool {
        let mut n = (s.re < -2.0) as usize;
        for &id in ids {
            n += self.indexed(id).drop_crossings(s);
        }
        n % 2 == 1
    }

    /// Fast classification by point location.
    pub fn locate(&self, sigma: SigmaPoint) -> PhaseRegime {
        let s = sigma.c();
        if let Some(a) = multicritical_anchor(s, BOUNDARY_TOL) {
            return PhaseRegime::MultiCritical(a);
        }
        if s.im < 0.0 {
            return self.locate(sigma.conj()).conj();
        }
        if s.im == 0.0 {
            return if s.re > -2.0 { PhaseRegime::OneCut } else { PhaseRegime::TwoCut };
        }
        let (id, d) = self.nearest_boundary(s);
        if d < BOUNDARY_TOL {
            if let CurveId::Gamma(g) = id {
                return PhaseRegime::Boundary(g);
            }
        }
        if self.left_of(s, &[CurveId::Gamma(Gamma::G5)]) {
            PhaseRegime::TwoCut
        } else if self.left_of(s, &[CurveId::Gamma(Gamma::G1), CurveId::Gamma(Gamma::G3)]) {
            PhaseRegime::ThreeCut
        } else {
            PhaseRegime::OneCut
        }
    }

    fn cache_path() -> Option<PathBuf> {
        std::env::var_os(CACHE_DIR_ENV).map(|d| PathBuf::from(d).join(CACHE_FILE))
    }

    fn load(path: &PathBuf) -> Result<BoundarySet, PhaseError> {
        let text = std::fs::read_to_string(path).map_err(|e| PhaseError::Cache(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| PhaseError::Cache(e.to_string()))
    }

    fn store(&self, path: &PathBuf) -> Result<(), PhaseError> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| PhaseError::Cache(e.to_string()))?;
        }
        let text = serde_json::to_string(self).map_err(|e| PhaseError::Cache(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| PhaseError::Cache(e.to_string()))
    }

    /// Load from the cache directory when it holds a valid file, otherwise
    /// trace and try to store.
    pub fn load_or_trace() -> Result<BoundarySet, PhaseError> {
        let path = BoundarySet::cache_path();
        if let Some(p) = &path {
            if let Ok(set) = BoundarySet::load(p) {
                if set.curves.len() == CurveId::ALL.len() {
                    return Ok(set);
                }
            }
        }
        let set = BoundarySet::trace_all()?;
        if let Some(p) = &path {
            // an unwritable cache only costs a retrace next time
            let _ = set.store(p);
        }
        Ok(set)
    }
}

/// The process-wide boundary set, traced (or loaded) on first use.
pub fn boundaries() -> Result<&'static BoundarySet, PhaseError> {
    static SET: OnceLock<Result<BoundarySet, String>> = OnceLock::new();
    SET.get_or_init(|| BoundarySet::load_or_trace().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| PhaseError::Cache(e.clone()))
}

/// Phase of σ. With `verify`, the located regime is checked against the
/// critical graph of its own quadratic differential.
pub fn classify(sigma: SigmaPoint, verify: bool) -> Result<PhaseRegime, PhaseError> {
    let regime = boundaries()?.locate(sigma);
    if verify {
        verify_regime(sigma, regime)?;
    }
    Ok(regime)
}

/// Distance from σ to the nearest phase boundary.
pub fn boundary_distance(sigma: SigmaPoint) -> Result<(CurveId, f64), PhaseError> {
    let s = sigma.c();
    let set = boundaries()?;
    let (id, d) = set.nearest_boundary(if s.im < 0.0 { s.conj() } else { s });
    Ok(if s.im < 0.0 { (id.conj(), d) } else { (id, d) })
}

/// Grid over a box around the support, with the zero level set of `Re η`
/// as walls.
struct LandGrid {
    origin: C64,
    spacing: f64,
    n: usize,
    labels: Vec<usize>,
}

impl LandGrid {
    fn new(lands: &Lands, barriers: &[&[C64]], half: f64) -> LandGrid {
        let n = 241;
        let spacing = 2.0 * half / (n - 1) as f64;
        // offset by a fraction of a cell so no centre sits on the real axis
        let origin = C64::new(-half + 0.37 * spacing, -half + 0.41 * spacing);
        let labels = flood_fill(origin, spacing, n, n, barriers);
        let _ = lands;
        LandGrid { origin, spacing, n, labels }
    }

    fn cell(&self, i: usize, j: usize) -> C64 {
        self.origin + C64::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    /// Components of stable cells within two cells of `z`.
    fn stable_near(&self, lands: &Lands, z: C64) -> Vec<usize> {
        let fi = (z.re - self.origin.re) / self.spacing;
        let fj = (z.im - self.origin.im) / self.spacing;
        let mut out = Vec::new();
        for di in -2i64..=3 {
            for dj in -2i64..=3 {
                let (i, j) = (fi.floor() as i64 + di, fj.floor() as i64 + dj);
                if i < 0 || j < 0 || i >= self.n as i64 || j >= self.n as i64 {
                    continue;
                }
                let (i, j) = (i as usize, j as usize);
                let label = self.labels[j * self.n + i];
                if out.contains(&label) {
                    continue;
                }
                if lands.sign(self.cell(i, j)).ok() == Some(-1) {
                    out.push(label);
                }
            }
        }
        out
    }

    /// Component of the cell nearest `z`.
    fn label_at(&self, z: C64) -> usize {
        let i = (((z.re - self.origin.re) / self.spacing).round().max(0.0) as usize).min(self.n - 1);
        let j = (((z.im - self.origin.im) / self.spacing).round().max(0.0) as usize).min(self.n - 1);
        self.labels[j * self.n + i]
    }
}

/// Check the defining connection and stable-land conditions of a regime.
pub fn verify_regime(sigma: SigmaPoint, regime: PhaseRegime) -> Result<(), PhaseError> {
    let mismatch = |detail: String| PhaseError::VerificationMismatch { sigma, claimed: regime, detail };
    let lands = match regime {
        PhaseRegime::OneCut | PhaseRegime::TwoCut | PhaseRegime::ThreeCut => match Lands::new(sigma, regime) {
            Ok(l) => l,
            Err(e) => return Err(mismatch(format!("support not found: {e}"))),
        },
        // boundaries and anchors are decided by the curves themselves
        _ => return Ok(()),
    };
    let qd = &lands.qd;
    // zero level of Re η: trajectories from the critical points on it
    let seeds: Vec<usize> = match regime {
        PhaseRegime::OneCut => vec![0, 1],
        PhaseRegime::TwoCut => vec![0, 1, 2, 3],
        _ => (0..6).collect(),
    };
    let opts = TraceOptions { rmax: 4.0 * qd.scale() + 4.0, ..TraceOptions::default() };
    let graph = critical_graph_from(qd, &seeds, &opts)?;
    let walls: Vec<&[C64]> = graph.trajectories.iter().map(|t| t.samples.as_slice()).collect();
    let half = 1.5 * qd.scale() + 1.0;
    let grid = LandGrid::new(&lands, &walls, half);
    let common = |p: C64, q: C64| {
        let a = grid.stable_near(&lands, p);
        let b = grid.stable_near(&lands, q);
        a.iter().any(|x| b.contains(x))
    };
    let scale = qd.scale();
    let right = C64::new(half * 0.97, 0.0);
    let left = -right;
    // the real axis beyond the box must be stable all the way to rmax
    let far_stable = |from: C64| {
        (0..=64).all(|k| {
            let t = k as f64 / 64.0;
            let z = from * (1.0 + t * (opts.rmax / half - 1.0));
            lands.sign(z).ok() == Some(-1)
        })
    };
    match regime {
        PhaseRegime::OneCut => {
            let e = one_cut(sigma, 1.0)?;
            let z0 = e.z0;
            if lands.support_distance(z0) < 1e-6 * scale || lands.support_distance(-z0) < 1e-6 * scale {
                return Err(mismatch("±z0 lies on the support".into()));
            }
            if !grid.stable_near(&lands, e.b1).contains(&grid.label_at(right))
                || !grid.stable_near(&lands, -e.b1).contains(&grid.label_at(left))
            {
                return Err(mismatch("no stable path from ±b1 to ±∞".into()));
            }
            if !far_stable(right) || !far_stable(left) {
                return Err(mismatch("real axis is not stable out to infinity".into()));
            }
        }
        PhaseRegime::TwoCut => {
            let e = two_cut(sigma)?;
            if !common(e.a2, -e.a2) {
                return Err(mismatch("no stable gap between −a2 and a2".into()));
            }
            if !grid.stable_near(&lands, e.b2).contains(&grid.label_at(right)) {
                return Err(mismatch("no stable path from b2 to +∞".into()));
            }
        }
        PhaseRegime::ThreeCut => {
            let e = three_cut(sigma, None)?;
            if !common(e.a3, e.b3) || !common(-e.a3, -e.b3) {
                return Err(mismatch("no stable gap between a3 and b3".into()));
            }
            if !grid.stable_near(&lands, e.c3).contains(&grid.label_at(right)) {
                return Err(mismatch("no stable path from c3 to +∞".into()));
            }
        }
        _ => unreachable!(),
    }
    Ok(())
}

/// Sampled regime labels on a rectangle, for export.
#[derive(Clone, Debug, Serialize)]
pub struct RegionSample {
    pub re: f64,
    pub im: f64,
    pub regime: String,
}

pub fn sample_regions(set: &BoundarySet, lo: C64, hi: C64, n: usize) -> Vec<RegionSample> {
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let re = lo.re + (hi.re - lo.re) * (i as f64 + 0.5) / n as f64;
            let im = lo.im + (hi.im - lo.im) * (j as f64 + 0.5) / n as f64;
            pts.push((re, im));
        }
    }
    pts.into_par_iter()
        .map(|(re, im)| {
            let r = set.locate(SigmaPoint::new(re, im).expect("finite"));
            RegionSample { re, im, regime: r.to_string() }
        })
        .collect()
}

pub const SCHEMA_VERSION: u32 = 1;

/// `{schemaVersion, curves, regions}` for the phase diagram.
pub fn diagram_json(set: &BoundarySet, show_fake: bool, grid: usize) -> serde_json::Value {
    let curves: Vec<_> = set
        .curves
        .iter()
        .filter(|c| show_fake || c.boundary)
        .map(|c| {
            serde_json::json!({
                "id": c.id.to_string(),
                "component": c.id.component_label(),
                "boundary": c.boundary,
                "anchors": c.anchors.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "asymptoticAngle": c.asymptotic_angle,
                "points": c.points.iter().map(|p| [p.re, p.im]).collect::<Vec<_>>(),
            })
        })
        .collect();
    let regions = sample_regions(set, C64::new(-6.0, -6.0), C64::new(4.0, 6.0), grid);
    serde_json::json!({ "schemaVersion": SCHEMA_VERSION, "curves": curves, "regions": regions })
}

/// One row per sample: `curve,component,boundary,index,re,im`.
pub fn write_curve_csv<W: std::io::Write>(curves: &[&BoundaryCurve], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["curve", "component", "boundary", "index", "re", "im"])?;
    for c in curves {
        for (i, p) in c.points.iter().enumerate() {
            w.write_record([
                c.id.to_string(),
                c.id.component_label().to_string(),
                c.boundary.to_string(),
                i.to_string(),
                format!("{:.15e}", p.re),
                format!("{:.15e}", p.im),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// SVG of the diagram on `[-r, r]²`: shaded regions, curves, anchors.
pub fn diagram_svg(set: &BoundarySet, r: f64, show_fake: bool) -> String {
    let px = 600.0;
    let map = |z: C64| ((z.re + r) / (2.0 * r) * px, (r - z.im) / (2.0 * r) * px);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{px}\" height=\"{px}\" viewBox=\"0 0 {px} {px}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let n = 120;
    let cell = px / n as f64;
    let samples = sample_regions(set, C64::new(-r, -r), C64::new(r, r), n);
    for (k, smp) in samples.iter().enumerate() {
        let fill = match smp.regime.as_str() {
            "OneCut" => "#e8f0fb",
            "TwoCut" => "#fbeee0",
            "ThreeCut" => "#e6f5e6",
            _ => continue,
        };
        let (i, j) = (k % n, k / n);
        s += &format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>\n",
            i as f64 * cell,
            px - (j + 1) as f64 * cell,
            cell + 0.3,
            cell + 0.3
        );
    }
    for c in &set.curves {
        if !c.boundary && !show_fake {
            continue;
        }
        let (stroke, dash) = if c.boundary { ("black", "") } else { ("#888", " stroke-dasharray=\"4 3\"") };
        let pts: Vec<String> = c
            .points
            .iter()
            .filter(|p| p.re.abs() <= 1.2 * r && p.im.abs() <= 1.2 * r)
            .map(|p| {
                let (x, y) = map(p.c());
                format!("{x:.2},{y:.2}")
            })
            .collect();
        s += &format!(
            "<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"{dash} points=\"{}\"><title>{}</title></polyline>\n",
            pts.join(" "),
            c.id
        );
    }
    for a in [Anchor::MinusTwo, Anchor::PlusISqrt12, Anchor::MinusISqrt12] {
        let (x, y) = map(a.point());
        s += &format!("<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"red\"><title>{a}</title></circle>\n");
    }
    s += "</svg>\n";
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfunction::{eta1, eta2};
    use proptest::prelude::*;

    fn sp(re: f64, im: f64) -> SigmaPoint {
        SigmaPoint::new(re, im).unwrap()
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(sp(0.0, SQRT12)).unwrap(), C64::new(0.0, 0.0));
        assert!(psi(sp(1.0, 0.0)).unwrap().re > 0.0);
        assert!(psi(sp(-1.0, 1.7795)).unwrap().re.abs() < 5e-4);
    }

    #[test]
    fn phi_examples() {
        assert!(phi(sp(2.0, 0.0)).norm() < 1e-15);
        let m2 = phi(sp(-2.0, 0.0));
        assert!(m2.re.abs() < 1e-15 && (m2.im.abs() - std::f64::consts::PI).abs() < 1e-15);
        assert!(phi(sp(-3.0, 1.5025)).re.abs() < 5e-4);
        let expect = -0.75 * 5f64.sqrt() + ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((phi(sp(-3.0, 0.0)).re - expect).abs() < 1e-14);
    }

    #[test]
    fn xi_and_upsilon_zeros() {
        let r = 4.0 / 3f64.sqrt();
        for b in [C64::new(4.0, 0.0), C64::new(-4.0, 0.0), C64::new(0.0, r), C64::new(0.0, -r)] {
            assert!(xi(b).unwrap().norm() < 1e-12);
        }
        assert!(matches!(xi(C64::new(0.0, 0.0)), Err(PhaseError::PoleAtZero)));
        assert_eq!(upsilon(C64::new(2.0, 0.0)), C64::new(0.0, 0.0));
        assert_eq!(upsilon(C64::new(-2.0, 0.0)), C64::new(0.0, 0.0));
        let qd = xi_qd();
        for b in [C64::new(0.7, -1.3), C64::new(-2.0, 3.0)] {
            assert!((qd.eval(b) - xi(b).unwrap()).norm() < 1e-12 * xi(b).unwrap().norm());
        }
    }

    #[test]
    fn joukowski_examples() {
        assert!((joukowski(C64::new(4.0, 0.0)).unwrap() - C64::new(-2.0, 0.0)).norm() < 1e-15);
        assert!((joukowski(C64::new(-4.0, 0.0)).unwrap() - C64::new(2.0, 0.0)).norm() < 1e-15);
        let r = 4.0 / 3f64.sqrt();
        assert!((joukowski(C64::new(0.0, r)).unwrap() - C64::new(0.0, -SQRT12)).norm() < 1e-14);
        assert!((joukowski(C64::new(0.0, -r)).unwrap() - C64::new(0.0, SQRT12)).norm() < 1e-14);
        assert!(matches!(joukowski(C64::new(0.0, 0.0)), Err(PhaseError::ZeroBeta)));
    }

    #[test]
    fn psi_derivative_squares_to_xi() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 20 {
            let s = C64::new(rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0));
            // Ψ is analytic in β on the β⁺ sheet, away from the cut rays
            if (s.im.abs() - SQRT12).abs() < 0.05 || s.im.abs() < 0.05 {
                continue;
            }
            let b = inverse_joukowski(s).0;
            let h = 1e-5;
            let f = |db: C64| psi(SigmaPoint::from_c(joukowski(b + db).unwrap()).unwrap()).unwrap();
            let d = (f(C64::new(h, 0.0)) - f(C64::new(-h, 0.0))) / (2.0 * h);
            let x = xi(b).unwrap();
            assert!((d * d - x).norm() < 1e-6 * x.norm(), "β={b} d²={} Ξ={x}", d * d);
            checked += 1;
        }
    }

    #[test]
    fn gamma1_joins_the_anchors() {
        let c = trace_boundary(CurveId::Gamma(Gamma::G1)).unwrap();
        let p = c.points.first().unwrap().c();
        let q = c.points.last().unwrap().c();
        assert!((p - C64::new(-2.0, 0.0)).norm() < 1e-6);
        assert!((q - C64::new(0.0, SQRT12)).norm() < 1e-3);
        assert!(c.level_error().unwrap() < 1e-7);
    }

    #[test]
    fn curves_lie_on_their_level_sets() {
        let set = boundaries().unwrap();
        for c in &set.curves {
            if c.id == CurveId::XI {
                continue;
            }
            let e = c.level_error().unwrap();
            assert!(e < 1e-7, "{} level error {e}", c.id);
        }
        let g5 = set.get(CurveId::Gamma(Gamma::G5));
        assert!((g5.asymptotic_angle.unwrap() - 0.75 * std::f64::consts::PI).abs() < 1e-2);
        let g3 = set.get(CurveId::Gamma(Gamma::G3));
        assert!((g3.asymptotic_angle.unwrap() - 0.75 * std::f64::consts::PI).abs() < 1e-2);
        for id in [CurveId::Gamma(Gamma::G3), CurveId::Gamma(Gamma::G4)] {
            let c = set.get(id);
            let start = c.points[0].c();
            assert!(c.anchors.iter().any(|a| (a.point() - start).norm() < 1e-6));
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(sp(1.0, 0.0), false).unwrap(), PhaseRegime::OneCut);
        assert_eq!(classify(sp(-3.0, 0.0), false).unwrap(), PhaseRegime::TwoCut);
        assert_eq!(classify(sp(-1.0, 2.0), false).unwrap(), PhaseRegime::ThreeCut);
        assert_eq!(classify(sp(1.0, 3.92), false).unwrap(), PhaseRegime::OneCut);
        assert_eq!(classify(sp(-2.0, 0.0), false).unwrap(), PhaseRegime::MultiCritical(Anchor::MinusTwo));
        assert_eq!(classify(sp(0.0, -SQRT12), false).unwrap(), PhaseRegime::MultiCritical(Anchor::MinusISqrt12));
        let g1 = &boundaries().unwrap().get(CurveId::Gamma(Gamma::G1)).points;
        assert_eq!(classify(g1[g1.len() / 2], false).unwrap(), PhaseRegime::Boundary(Gamma::G1));
    }

    #[test]
    fn verified_classification() {
        for (re, im) in [(1.0, 0.0), (-3.0, 0.0), (-1.0, 2.0), (0.5, 1.0), (-3.0, 1.0)] {
            classify(sp(re, im), true).unwrap();
        }
    }

    #[test]
    fn verification_rejects_a_wrong_regime() {
        assert!(matches!(
            verify_regime(sp(-1.0, 2.5), PhaseRegime::OneCut),
            Err(PhaseError::VerificationMismatch { .. })
        ));
    }

    #[test]
    fn flips_along_caption_lines() {
        let flip = |f: &dyn Fn(f64) -> SigmaPoint, mut lo: f64, mut hi: f64| {
            let r0 = classify(f(lo), false).unwrap();
            for _ in 0..40 {
                let m = 0.5 * (lo + hi);
                if classify(f(m), false).unwrap() == r0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            0.5 * (lo + hi)
        };
        let y = flip(&|y| sp(-1.0, y), 1.6, 1.9);
        assert!((y - 1.7795).abs() < 5e-3, "{y}");
        let y = flip(&|y| sp(-3.0, y), 1.3, 1.7);
        assert!((y - 1.5025).abs() < 5e-3, "{y}");
        let x = flip(&|x| sp(x, 4.0), -1.5, -0.8);
        assert!((x + 1.15).abs() < 2e-2, "{x}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn inverse_joukowski_round_trip(re in -8.0f64..8.0, im in -8.0f64..8.0) {
            let s = C64::new(re, im);
            prop_assume!(!BranchConvention::on_cut(s));
            let (bp, bm) = inverse_joukowski(s);
            prop_assert!((joukowski(bp).unwrap() - s).norm() < 1e-12 * (1.0 + s.norm()));
            prop_assert!((joukowski(bm).unwrap() - s).norm() < 1e-12 * (1.0 + s.norm()));
        }

        #[test]
        fn psi_is_eta1_at_z0(re in -1.5f64..4.0, im in -5.0f64..5.0) {
            let s = sp(re, im);
            prop_assume!(!BranchConvention::on_cut(s.c()));
            let z0 = one_cut(s, 1.0).unwrap().z0;
            if let Ok(e) = eta1(z0, s) {
                prop_assert!((psi(s).unwrap() - e.value).norm() < 1e-9);
            }
        }

        #[test]
        fn phi_is_eta2_at_origin(re in -6.0f64..-2.1, im in -3.0f64..3.0) {
            let s = sp(re, im);
            let e = eta2(C64::new(0.0, 0.0), s).unwrap();
            prop_assert!((phi(s) - e.value).norm() < 1e-9);
        }

        #[test]
        fn classification_is_conjugation_symmetric(re in -8.0f64..6.0, im in 0.0f64..8.0) {
            let s = sp(re, im);
            prop_assert_eq!(classify(s.conj(), false).unwrap(), classify(s, false).unwrap().conj());
        }
    }
}
