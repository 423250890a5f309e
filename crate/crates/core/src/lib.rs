//! Long-time behaviour of the damped p-system on the half-line, with the M1
//! radiative-transfer closure as the main instance.
//!
//! The crate builds the asymptotic profiles (a nonlinear diffusion wave plus
//! an exponentially decaying correction), integrates the hyperbolic system,
//! forms the antiderivative perturbation `(V, z)` and measures its decay
//! rates against the predicted exponent tables.
//!
//! * [`closure`]: Eddington factor, closure identity, coefficient laws.
//! * [`grid`]: half-line grid, fields, norms, boundary-aware differences.
//! * [`profiles`]: diffusion wave and correction.
//! * [`solver`]: central-upwind finite volumes with exact damping.
//! * [`perturbation`]: `V`, `z`, source terms and norm histories.
//! * [`greens`]: heat kernel with Dirichlet image and its norm scalings.
//! * [`decay`]: exponent fits, theorem tables, hypothesis proxies.
//! * [`config`], [`pipeline`], [`report`]: run configuration, end-to-end
//!   runs and artifacts.
//!
//! Runnable examples live in `examples/`: `closure_check`, `greens_scaling`,
//! `diffusion_wave`, `correction_decay`, `simulate_m1`, `faster_decay` and
//! `sweep`.

pub mod closure;
pub mod config;
pub mod decay;
pub mod error;
pub mod greens;
pub mod grid;
pub mod perturbation;
pub mod pipeline;
pub mod profiles;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
