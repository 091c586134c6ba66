//! Trace the phase boundaries, bisect the one/three-cut and two/three-cut
//! transitions along a few lines, and draw the diagram.

use quartic::model::SigmaPoint;
use quartic::phase::{boundaries, classify, diagram_svg, psi, CurveId};

fn flip(f: impl Fn(f64) -> SigmaPoint, mut lo: f64, mut hi: f64) -> f64 {
    let start = classify(f(lo), false).expect("classifiable");
    for _ in 0..40 {
        let m = 0.5 * (lo + hi);
        if classify(f(m), false).expect("classifiable") == start {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let set = boundaries()?;
    for id in CurveId::ALL {
        let c = set.get(id);
        let angle = c.asymptotic_angle.map(|a| format!("{a:.4}")).unwrap_or_else(|| "bounded".into());
        println!(
            "{:>4} ({:>4}) boundary={:<5} samples={:<6} asymptote={angle} level error {:.1e}",
            id.to_string(),
            id.component_label(),
            c.boundary,
            c.points.len(),
            c.level_error()?
        );
    }
    let sp = |re, im| SigmaPoint::new(re, im).expect("finite");
    println!("Re σ = −1: flip at Im σ = {:.4}", flip(|y| sp(-1.0, y), 1.6, 1.9));
    println!("Re σ = −3: flip at Im σ = {:.4}", flip(|y| sp(-3.0, y), 1.3, 1.7));
    println!("Im σ =  4: flip at Re σ = {:.4}", flip(|x| sp(x, 4.0), -1.5, -0.8));
    let s = sp(1.0, 3.92);
    println!("σ = {s}: {} with Re Ψ = {:.2e}", classify(s, false)?, psi(s)?.re);

    let path = std::env::temp_dir().join("phase_diagram.svg");
    std::fs::write(&path, diagram_svg(set, 6.0, true))?;
    println!("wrote {}", path.display());
    Ok(())
}
