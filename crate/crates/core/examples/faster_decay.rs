//! Zero-mass data with `u_plus = 0` decay faster: damped Euler with a
//! quadrupole volume perturbation.
//!
//!     cargo run --release --example faster_decay

use m1lab::config::preset;
use m1lab::pipeline::{simulate, V_L2};

fn main() -> m1lab::Result<()> {
    let cfg = preset("psystem-faster")?;
    let out = simulate(&cfg)?;
    let h = &out.hypotheses;
    println!("mass of V0 + z0/alpha = {:.3e}, zero-mass hypothesis: {}", h.mass, h.zero_mass);
    for line in &out.report {
        if let Some(fit) = &line.fit {
            println!("{:<24} expected {:+.3} fitted {:+.3}", line.quantity.name(), line.expected, fit.exponent);
        }
    }
    let v = out.line(&V_L2).and_then(|l| l.fit.as_ref()).expect("V fit");
    println!("||V||: {:+.3} (slow rate would be -0.25)", v.exponent);
    Ok(())
}
