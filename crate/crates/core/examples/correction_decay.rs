//! The correction pair decays exactly like `exp(-alpha t)` in every norm.
//!
//!     cargo run --release --example correction_decay

use m1lab::grid::HalfLineGrid;
use m1lab::profiles::{bump_m0, verify_correction_decay, Correction};

fn main() -> m1lab::Result<()> {
    let grid = HalfLineGrid::new(50.0, 2000)?;
    let correction = Correction::new(0.05, 1.0, bump_m0(&grid, 2.0)?);
    let times: Vec<f64> = (0..=20).map(f64::from).collect();
    let checks = verify_correction_decay(&correction, &times);
    let worst = checks.iter().map(|c| c.relative_error).fold(0.0, f64::max);
    println!("max |norm(t) / (norm(0) e^(-t)) - 1| = {worst:.3e} over {} checks", checks.len());

    let (vhat, uhat) = correction.at(0.0);
    println!("int vhat(0) = {:.12}, uhat(L, 0) = {:.12}", vhat.integrate(), uhat.values()[grid.cells() - 1]);
    Ok(())
}
