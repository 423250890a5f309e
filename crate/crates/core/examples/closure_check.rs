//! Closure identity and Eddington factor bounds.
//!
//!     cargo run --release --example closure_check

use m1lab::closure::{eddington_chi, radiative_pressure_1d};
use m1lab::pipeline::closure_check;

fn main() -> m1lab::Result<()> {
    let r = closure_check(200, 10_000, 10_000, 7)?;
    println!("identity: max |chi rho - rhs| = {:.3e} over {} points", r.max_identity_residual, r.identity_samples);
    println!("chi in [{:.15}, {:.15}], monotone in |u|: {}", r.chi_min, r.chi_max, r.chi_monotone);

    println!("\n{:>6} {:>12} {:>14}", "u", "chi(u)", "P(rho=2, u)");
    for i in 0..=10 {
        let u = i as f64 / 10.0;
        println!("{u:>6.2} {:>12.8} {:>14.8}", eddington_chi(u)?, radiative_pressure_1d(2.0, u)?);
    }
    Ok(())
}
