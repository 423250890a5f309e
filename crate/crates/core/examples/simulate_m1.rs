//! Full M1 run: diffusion wave, hyperbolic solve, perturbation and decay
//! fits against the improved-rate table. Writes artifacts to `out/m1-small`.
//!
//!     cargo run --release --example simulate_m1 [cells]
//!
//! The default of 2048 cells takes well under a minute; the bundled
//! preset uses 8192.

use m1lab::config::preset;
use m1lab::pipeline::{simulate, Outcome};
use m1lab::report::{format_report, write_outcome};

fn main() -> m1lab::Result<()> {
    let mut cfg = preset("m1-small")?;
    cfg.grid.cells = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2048);
    let out = simulate(&cfg)?;
    println!(
        "delta0 = {:.6e}, {} steps, mass drift {:.2e}",
        out.prepared.delta0,
        out.trajectory.steps(),
        out.trajectory.max_relative_mass_drift()
    );
    let h = &out.hypotheses;
    println!("hypotheses: l1 {} zero-mass {} -> strongest table {}", h.l1_data, h.zero_mass, h.strongest());
    print!("{}", format_report(&out.report));
    let manifest = write_outcome(&Outcome::Simulation(Box::new(out)), "out/m1-small".as_ref())?;
    println!("passed: {}", manifest.passed);
    Ok(())
}
