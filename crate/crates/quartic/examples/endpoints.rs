//! Support endpoints in each regime and the algebraic identities they obey.

use quartic::endpoints::{lagrange_constant, one_cut, three_cut, two_cut};
use quartic::model::{PhaseRegime, SigmaPoint};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = SigmaPoint::new(1.0, 0.5)?;
    let e = one_cut(s, 1.0)?;
    println!("one-cut   σ={s}: b1={:.10} z0={:.10}", e.b1, e.z0);
    println!("          residuals {:.1e} {:.1e}", e.residuals(s.c())[0].norm(), e.residuals(s.c())[1].norm());

    let s = SigmaPoint::new(-3.0, 0.0)?;
    let e = two_cut(s)?;
    println!("two-cut   σ={s}: a2={:.10} b2={:.10}", e.a2, e.b2);
    println!("          ℓ* = {:.10}", lagrange_constant(s, PhaseRegime::TwoCut)?.ell_star);

    let s = SigmaPoint::new(-1.0, 2.0)?;
    let e = three_cut(s, None)?;
    println!("three-cut σ={s}: a3={:.10} b3={:.10} c3={:.10}", e.a3, e.b3, e.c3);
    println!("          largest residual (algebraic and gap) {:.1e}", e.residual);
    Ok(())
}
