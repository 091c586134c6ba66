//! Locate a few couplings in the phase diagram and confirm one of them
//! against its own critical graph.
//!
//! ```bash
//! cargo run --example classify_point
//! cargo run --example classify_point -- -1.2 2.4
//! ```

use quartic::model::SigmaPoint;
use quartic::phase::{boundary_distance, classify};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let points = if args.len() == 2 {
        vec![(args[0], args[1])]
    } else {
        vec![(1.0, 0.0), (-3.0, 0.0), (-2.0, 0.0), (-1.0, 2.0), (-3.0, 1.0), (1.0, 3.92)]
    };
    for (re, im) in points {
        let s = SigmaPoint::new(re, im)?;
        let regime = classify(s, false)?;
        let (curve, d) = boundary_distance(s)?;
        println!("σ = {:<10} {:<28} nearest {curve} at {d:.4}", s.to_string(), regime.to_string());
    }
    let s = SigmaPoint::new(-1.0, 2.0)?;
    println!("verified: σ = {s} is {}", classify(s, true)?);
    Ok(())
}
