//! Norm exponents of the heat kernel and the linearized propagation of
//! localized data placed far from the wall.
//!
//!     cargo run --release --example greens_scaling

use m1lab::greens::{propagate_initial, HeatKernel};
use m1lab::grid::HalfLineGrid;
use m1lab::pipeline::greens_check;
use m1lab::solver::geometric_times;

fn main() -> m1lab::Result<()> {
    let d = 1.0 / 3.0;
    let times = geometric_times(1e2, 1e4, 16);
    for l in greens_check(d, &times)? {
        println!(
            "k={} j={} p={:<4} expected {:+.4} fitted {:+.4}",
            l.k, l.j, l.p, l.expected, l.fit.exponent
        );
    }

    // J1 applied to a Gaussian bump centred at x = 400
    let kernel = HeatKernel::new(d)?;
    let grid = HalfLineGrid::new(1000.0, 4000)?;
    let data = grid.sample(|x| (-(x - 400.0) * (x - 400.0) / 8.0).exp());
    println!("\n{:>10} {:>14}", "t", "||J1 V0||_L2");
    for t in [1e2, 3e2, 1e3, 3e3, 1e4] {
        println!("{t:>10.0} {:>14.6e}", propagate_initial(&kernel, &data, t)?.l2());
    }
    Ok(())
}
