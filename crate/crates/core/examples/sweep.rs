//! Parallel sweep over the far-field velocity.
//!
//!     cargo run --release --example sweep [threads]

use m1lab::config::preset;
use m1lab::pipeline::{sweep, Outcome, V_L2};

fn main() -> m1lab::Result<()> {
    let threads = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let configs: Vec<_> = [0.0, 0.01, 0.02, 0.04]
        .into_iter()
        .map(|u_plus| {
            let mut c = preset("m1-small").expect("preset");
            c.name = format!("u+={u_plus}");
            c.far_field.u_plus = u_plus;
            c.grid.cells = 1024;
            c.time.t_end = 1000.0;
            c
        })
        .collect();
    for (cfg, result) in configs.iter().zip(sweep(&configs, threads)?) {
        match result? {
            Outcome::Simulation(s) => {
                let fit = s.line(&V_L2).and_then(|l| l.fit.as_ref());
                println!(
                    "{:<10} delta0 {:.4e}  ||V|| exponent {:+.3}",
                    cfg.name,
                    s.prepared.delta0,
                    fit.map_or(f64::NAN, |f| f.exponent)
                );
            }
            Outcome::Profile(_) => unreachable!("simulation configs"),
        }
    }
    Ok(())
}
