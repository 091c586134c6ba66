//! Density, total mass, the g-function and the variational equality on the
//! traced support, for one coupling per regime.

use quartic::gfunction::Lands;
use quartic::model::{PhaseRegime, SigmaPoint, C64};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        (SigmaPoint::new(1.0, 0.0)?, PhaseRegime::OneCut),
        (SigmaPoint::new(-3.0, 0.0)?, PhaseRegime::TwoCut),
        (SigmaPoint::new(-1.0, 2.0)?, PhaseRegime::ThreeCut),
    ];
    for (s, regime) in cases {
        let lands = Lands::new(s, regime)?;
        let samples = lands.density_samples();
        let peak = samples.iter().map(|d| d.density.re).fold(0.0, f64::max);
        let worst_im = samples.iter().map(|d| d.density.im.abs()).fold(0.0, f64::max);
        println!("σ = {s} ({regime}), {} arcs", lands.support.len());
        println!("  mass           {:.12}", lands.mass());
        println!("  density peak   {peak:.6}, largest |Im| {worst_im:.1e}");
        println!("  variational    {:.1e}", lands.variational_residual()?);
        println!("  g(10)          {:.10}", lands.g(C64::new(10.0, 0.0))?);
    }
    Ok(())
}
