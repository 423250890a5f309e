//! The nonlinear diffusion wave and its decay exponents.
//!
//!     cargo run --release --example diffusion_wave

use m1lab::config::preset;
use m1lab::pipeline::profile_check;
use m1lab::report::format_report;

fn main() -> m1lab::Result<()> {
    let mut cfg = preset("lemma21")?;
    cfg.grid.cells = 4096;
    let out = profile_check(&cfg)?;
    print!("{}", format_report(&out.report));

    let last = out.bundles.last().expect("profiles");
    println!("\nt = {}: vbar(0) - v+ = {:.6e}, ubar max = {:.6e}", last.t, last.vbar.values()[0] - last.v_plus, last.ubar.linf());
    Ok(())
}
