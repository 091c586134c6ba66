//! Exact C_2g, K_g and Painlevé-I coefficients, and how fast the map counts
//! approach their asymptotic form.

use quartic::maps::{asymptotic_ratio, c2g_constants, c2g_from_painleve, kg_constant, painleve_a};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let top = 5;
    let c = c2g_constants(top);
    let a = painleve_a(top);
    for g in 0..=top {
        println!("C_{} = {}   K_{g} = {}", 2 * g, c[g], kg_constant(g));
    }
    for (k, ak) in a.iter().enumerate() {
        println!("a_{k} = {ak}   → C_{} ≈ {:.6e} (exact {:.6e})", 2 * k, c2g_from_painleve(k, ak), c[k].to_f64());
    }
    for g in 0..=3 {
        let row: Vec<String> = [50, 100, 200]
            .iter()
            .map(|&j| asymptotic_ratio(j, g).map(|r| format!("{:+.3e}", r - 1.0)))
            .collect::<Result<_, _>>()?;
        println!("g={g}: ratio − 1 at j = 50, 100, 200: {}", row.join("  "));
    }
    Ok(())
}
