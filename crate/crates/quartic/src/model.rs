//! Parameters of the quartic model `V(z) = σz²/2 + z⁴/4`, the parameter map
//! `σ = u^{-1/2}`, and the branch conventions shared by every other module.

use std::fmt;

use num_complex::Complex64;

pub type C64 = Complex64;

/// `√12`, the modulus of the two non-real multi-critical points.
pub const SQRT12: f64 = 3.464_101_615_137_754_6;

#[derive(Debug, thiserror::Error, Clone, Copy, PartialEq)]
pub enum ModelError {
    #[error("parameter must be nonzero")]
    ZeroParameter,
    #[error("parameter must be finite")]
    NonFinite,
    #[error("σ = {0} lies on a branch cut")]
    OnBranchCut(C64),
}

/// Complex coupling σ of the quartic potential.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SigmaPoint {
    pub re: f64,
    pub im: f64,
}

impl SigmaPoint {
    pub fn new(re: f64, im: f64) -> Result<Self, ModelError> {
        if re.is_finite() && im.is_finite() {
            Ok(SigmaPoint { re, im })
        } else {
            Err(ModelError::NonFinite)
        }
    }

    pub fn c(&self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn from_c(z: C64) -> Result<Self, ModelError> {
        SigmaPoint::new(z.re, z.im)
    }

    pub fn conj(&self) -> Self {
        SigmaPoint { re: self.re, im: -self.im }
    }
}

impl From<f64> for SigmaPoint {
    fn from(x: f64) -> Self {
        SigmaPoint { re: x, im: 0.0 }
    }
}

impl fmt::Display for SigmaPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im >= 0.0 {
            write!(f, "{}+{}i", self.re, self.im)
        } else {
            write!(f, "{}{}i", self.re, self.im)
        }
    }
}

/// Coupling u of the unscaled model.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct UPoint {
    pub re: f64,
    pub im: f64,
}

impl UPoint {
    pub fn new(re: f64, im: f64) -> Result<Self, ModelError> {
        if re.is_finite() && im.is_finite() {
            Ok(UPoint { re, im })
        } else {
            Err(ModelError::NonFinite)
        }
    }

    pub fn c(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Which multi-critical point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Anchor {
    MinusTwo,
    PlusISqrt12,
    MinusISqrt12,
}

impl Anchor {
    pub fn point(self) -> C64 {
        match self {
            Anchor::MinusTwo => C64::new(-2.0, 0.0),
            Anchor::PlusISqrt12 => C64::new(0.0, SQRT12),
            Anchor::MinusISqrt12 => C64::new(0.0, -SQRT12),
        }
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Anchor::MinusTwo => "-2",
            Anchor::PlusISqrt12 => "+i*sqrt(12)",
            Anchor::MinusISqrt12 => "-i*sqrt(12)",
        };
        f.write_str(s)
    }
}

/// The six phase-boundary curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Gamma {
    G1,
    G2,
    G3,
    G4,
    G5,
    G6,
}

impl Gamma {
    pub const ALL: [Gamma; 6] = [Gamma::G1, Gamma::G2, Gamma::G3, Gamma::G4, Gamma::G5, Gamma::G6];

    pub fn index(self) -> usize {
        self as usize + 1
    }

    /// Mirror image under complex conjugation.
    pub fn conj(self) -> Gamma {
        match self {
            Gamma::G1 => Gamma::G2,
            Gamma::G2 => Gamma::G1,
            Gamma::G3 => Gamma::G4,
            Gamma::G4 => Gamma::G3,
            Gamma::G5 => Gamma::G6,
            Gamma::G6 => Gamma::G5,
        }
    }

    pub fn parse(s: &str) -> Option<Gamma> {
        let t = s.trim().trim_start_matches(['g', 'G', 'γ']);
        match t {
            "1" => Some(Gamma::G1),
            "2" => Some(Gamma::G2),
            "3" => Some(Gamma::G3),
            "4" => Some(Gamma::G4),
            "5" => Some(Gamma::G5),
            "6" => Some(Gamma::G6),
            _ => None,
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.index())
    }
}

/// Regime of the equilibrium measure at a given σ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum PhaseRegime {
    OneCut,
    TwoCut,
    ThreeCut,
    Boundary(Gamma),
    MultiCritical(Anchor),
}

impl PhaseRegime {
    /// Number of cuts for the three open regions.
    pub fn cuts(self) -> Option<usize> {
        match self {
            PhaseRegime::OneCut => Some(1),
            PhaseRegime::TwoCut => Some(2),
            PhaseRegime::ThreeCut => Some(3),
            _ => None,
        }
    }

    pub fn from_cuts(q: usize) -> Option<PhaseRegime> {
        match q {
            1 => Some(PhaseRegime::OneCut),
            2 => Some(PhaseRegime::TwoCut),
            3 => Some(PhaseRegime::ThreeCut),
            _ => None,
        }
    }

    pub fn conj(self) -> PhaseRegime {
        match self {
            PhaseRegime::Boundary(g) => PhaseRegime::Boundary(g.conj()),
            PhaseRegime::MultiCritical(Anchor::PlusISqrt12) => PhaseRegime::MultiCritical(Anchor::MinusISqrt12),
            PhaseRegime::MultiCritical(Anchor::MinusISqrt12) => PhaseRegime::MultiCritical(Anchor::PlusISqrt12),
            r => r,
        }
    }
}

impl fmt::Display for PhaseRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseRegime::OneCut => f.write_str("OneCut"),
            PhaseRegime::TwoCut => f.write_str("TwoCut"),
            PhaseRegime::ThreeCut => f.write_str("ThreeCut"),
            PhaseRegime::Boundary(g) => write!(f, "Boundary({g})"),
            PhaseRegime::MultiCritical(a) => write!(f, "MultiCritical({a})"),
        }
    }
}

/// Branch conventions: cuts `L± = ±i√12 − t` and `L = −2 − t` (`t > 0`).
///
/// `√(12ϰ+σ²)` is the product `√(σ − i√(12ϰ))·√(σ + i√(12ϰ))` of principal
/// roots, whose discontinuities are exactly `L±`; it is positive for real σ.
/// `z₀` takes `arg(z₀²) ∈ [0, 2π)`, which places its extra cut on `L`.
/// Points on a cut take the limit from above.
#[derive(Clone, Copy, Debug, Default)]
pub struct BranchConvention;

impl BranchConvention {
    /// `√(12ϰ + σ²)` on the fixed sheet.
    pub fn sqrt_12k_plus_sigma2(sigma: C64, kappa: f64) -> C64 {
        let r = (12.0 * kappa).sqrt();
        above(sigma - C64::new(0.0, r)).sqrt() * above(sigma + C64::new(0.0, r)).sqrt()
    }

    /// Square root with `arg` of the argument taken in `[0, 2π)`.
    pub fn sqrt_arg_0_2pi(z2: C64) -> C64 {
        let mut a = z2.arg();
        if a < 0.0 {
            a += 2.0 * std::f64::consts::PI;
        }
        if z2.im == 0.0 && z2.re > 0.0 {
            a = 0.0;
        }
        C64::from_polar(z2.norm().sqrt(), a / 2.0)
    }

    /// Whether σ lies on the interior of one of the three cut rays.
    pub fn on_cut(sigma: C64) -> bool {
        let tol = 1e-14 * sigma.norm().max(1.0);
        let on_real = sigma.im.abs() <= tol && sigma.re < -2.0;
        let on_plus = (sigma.im - SQRT12).abs() <= tol && sigma.re < 0.0;
        let on_minus = (sigma.im + SQRT12).abs() <= tol && sigma.re < 0.0;
        on_real || on_plus || on_minus
    }
}

/// Map a signed zero imaginary part to `+0.0`, so negative reals evaluate
/// as limits from above.
fn above(z: C64) -> C64 {
    if z.im == 0.0 {
        C64::new(z.re, 0.0)
    } else {
        z
    }
}

/// `V(z; σ) = σz²/2 + z⁴/4`.
pub fn potential(z: C64, sigma: SigmaPoint) -> C64 {
    let z2 = z * z;
    sigma.c() * z2 / 2.0 + z2 * z2 / 4.0
}

/// `σ = u^{-1/2}` with the principal root.
pub fn sigma_from_u(u: UPoint) -> Result<SigmaPoint, ModelError> {
    let c = u.c();
    if c == C64::new(0.0, 0.0) {
        return Err(ModelError::ZeroParameter);
    }
    SigmaPoint::from_c(above(c).sqrt().inv())
}

/// `u = σ^{-2}`.
pub fn u_from_sigma(sigma: SigmaPoint) -> Result<UPoint, ModelError> {
    let c = sigma.c();
    if c == C64::new(0.0, 0.0) {
        return Err(ModelError::ZeroParameter);
    }
    let u = (c * c).inv();
    UPoint::new(u.re, u.im)
}

/// The three multi-critical points `−2`, `+i√12`, `−i√12`.
pub fn multicritical_points() -> [SigmaPoint; 3] {
    [Anchor::MinusTwo, Anchor::PlusISqrt12, Anchor::MinusISqrt12]
        .map(|a| SigmaPoint::from_c(a.point()).expect("finite"))
}

/// The anchor within `tol` of σ, if any.
pub fn multicritical_anchor(sigma: C64, tol: f64) -> Option<Anchor> {
    [Anchor::MinusTwo, Anchor::PlusISqrt12, Anchor::MinusISqrt12]
        .into_iter()
        .find(|a| (a.point() - sigma).norm() <= tol)
}
