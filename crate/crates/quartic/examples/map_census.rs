//! Enumerate connected labeled 4-valent graphs by genus and compare with
//! the closed-form counts.
//!
//! ```bash
//! cargo run --release --example map_census -- 5
//! ```

use std::time::Instant;

use quartic::maps::{closed_form_count, connected_identity_holds, enumerate_census};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let top: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(4);
    let mut connected = Vec::new();
    for j in 1..=top {
        let t = Instant::now();
        let c = enumerate_census(j, false)?;
        let closed: Vec<String> = (0..=3).map(|g| closed_form_count(j, g).map(|n| n.to_string())).collect::<Result<_, _>>()?;
        println!(
            "j={j}: {} of {} pairings connected, by genus {:?} (closed forms g≤3 {:?}) in {:.2?}",
            c.connected,
            c.pairings,
            c.counts,
            closed,
            t.elapsed()
        );
        connected.push(c.connected);
    }
    if connected.len() <= 4 {
        println!("exponential-formula identity holds: {}", connected_identity_holds(&connected));
    }
    Ok(())
}
