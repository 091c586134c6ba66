//! Solve the string equation genus by genus and integrate the energy terms
//! into exact free-energy series.

use quartic::algebra::fmt_rational;
use quartic::topo::{
    closed_form_coefficient, expansion_tables, free_energy_series, singular_structure, string_recursion_u,
    string_residual,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (genus, order) = (4, 10);
    let mut table = string_recursion_u(genus)?;
    for g in 1..=genus {
        let (c, twice) = singular_structure(&table, g)?;
        println!("r_{} ~ {c} · (u + 1/12)^({twice}/2) near u = −1/12", 2 * g);
    }
    let tables = expansion_tables(&mut table);
    let clean = string_residual(&table, &tables).iter().all(|r| r.is_zero());
    println!("string residual vanishes through N^-{}: {clean}", 2 * genus);

    let fe = free_energy_series(&tables, order)?;
    for g in 0..=genus {
        let coeffs: Vec<String> = (1..=order).map(|j| fmt_rational(&fe.get(g, j))).collect();
        let agrees = (1..=order).all(|j| closed_form_coefficient(g, j).map_or(true, |c| c == fe.get(g, j)));
        println!("f_{}: [{}]  closed form agrees: {agrees}", 2 * g, coeffs.join(", "));
    }
    let counts: Vec<String> = (1..=order).map(|j| fmt_rational(&fe.implied_count(1, j))).collect();
    println!("torus map counts: {}", counts.join(", "));
    Ok(())
}
