//! Trace the critical graph of a regime's quadratic differential and write
//! it as CSV and SVG into the system temp directory.
//!
//! ```bash
//! cargo run --example critical_graph -- -3 1 two-cut
//! ```

use std::fs::File;

use quartic::cli::parse_regime;
use quartic::gfunction::Lands;
use quartic::model::{PhaseRegime, SigmaPoint, C64};
use quartic::quaddiff::{build_qd, critical_graph, to_svg, write_csv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (s, regime) = match args.as_slice() {
        [re, im, q] => (SigmaPoint::new(re.parse()?, im.parse()?)?, parse_regime(q)?),
        _ => (SigmaPoint::new(1.0, 0.0)?, PhaseRegime::OneCut),
    };
    let graph = critical_graph(&build_qd(s, regime)?)?;
    println!("σ = {s} ({regime}): {} trajectories", graph.trajectories.len());
    for &(i, j) in &graph.connections {
        println!("  {:.6} to {:.6}", graph.critical[i].z, graph.critical[j].z);
    }
    println!("  asymptotic directions per π/8 + kπ/4 bin: {:?}", graph.census_bins());
    println!("  largest angle error {:.1e}, z → −z asymmetry {:.1e}", graph.census_error(), graph.symmetry_error());

    let dir = std::env::temp_dir();
    write_csv(&graph, File::create(dir.join("critical_graph.csv"))?)?;
    let lands = Lands::new(s, regime)?;
    let stable = |z: C64| lands.sign(z).ok() == Some(-1);
    std::fs::write(dir.join("critical_graph.svg"), to_svg(&graph, 4.0, Some(&stable)))?;
    println!("wrote {}", dir.join("critical_graph.{csv,svg}").display());
    Ok(())
}
