//! M1 closure algebra and the coefficient laws of the damped p-system
//!
//! ```text
//!     v_t - u_x = 0,
//!     u_t + p(v)_x = -alpha u + (g(u) f(v))_x.
//! ```
//!
//! The M1 model in Lagrangian coordinates is the instance
//! `p(v) = 1/(3v)`, `f(v) = 1/v`, `g(u) = u^2 s / (2 + s)` with
//! `s = sqrt(4 - 3u^2)` and `alpha` equal to the opacity.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Scalar coefficient law.
pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn check_flux(u: f64) -> Result<()> {
    if u.is_finite() && u.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "u",
            value: u,
            domain: "|u| <= 1",
        })
    }
}

fn check_volume(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Vacuum { x: f64::NAN, v })
    }
}

fn root(u: f64) -> f64 {
    (4.0 - 3.0 * u * u).sqrt()
}

/// Eddington factor `chi(u) = (3 + 4u^2) / (5 + 2 sqrt(4 - 3u^2))`.
pub fn eddington_chi(u: f64) -> Result<f64> {
    check_flux(u)?;
    Ok((3.0 + 4.0 * u * u) / (5.0 + 2.0 * root(u)))
}

/// A checked evaluation of the Eddington factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EddingtonEval {
    pub u: f64,
    pub chi: f64,
}

impl EddingtonEval {
    pub fn new(u: f64) -> Result<Self> {
        Ok(Self {
            u,
            chi: eddington_chi(u)?,
        })
    }
}

/// One-dimensional radiative pressure `chi(u) rho`.
///
/// In one dimension `u (x) u / |u|^2 = 1`, so the pressure tensor collapses
/// to `chi(u) rho`, which is smooth through `u = 0`.
pub fn radiative_pressure_1d(rho: f64, u: f64) -> Result<f64> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::Domain {
            what: "rho",
            value: rho,
            domain: "rho >= 0",
        });
    }
    Ok(eddington_chi(u)? * rho)
}

/// `|chi(u) rho - (rho/3 + 2 rho u^2 / (2 + sqrt(4 - 3u^2)))|`, zero in exact arithmetic.
pub fn closure_identity_residual(rho: f64, u: f64) -> Result<f64> {
    let lhs = radiative_pressure_1d(rho, u)?;
    let rhs = rho / 3.0 + 2.0 * rho * u * u / (2.0 + root(u));
    Ok((lhs - rhs).abs())
}

pub fn m1_g(u: f64) -> Result<f64> {
    check_flux(u)?;
    Ok(m1_g_unchecked(u))
}

pub fn m1_f(v: f64) -> Result<f64> {
    check_volume(v)?;
    Ok(1.0 / v)
}

pub fn m1_p(v: f64) -> Result<f64> {
    check_volume(v)?;
    Ok(1.0 / (3.0 * v))
}

fn m1_g_unchecked(u: f64) -> f64 {
    let s = root(u);
    u * u * s / (2.0 + s)
}

fn m1_g_deriv_unchecked(u: f64) -> f64 {
    let s = root(u);
    let d = 2.0 + s;
    2.0 * u * s / d - 6.0 * u * u * u / (s * d * d)
}

/// Which family a [`ModelSpec`] belongs to; used for config round-trips.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    M1,
    GammaLaw { gamma: f64 },
    Custom(String),
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::M1 => write!(f, "m1"),
            ModelKind::GammaLaw { gamma } => write!(f, "gamma-law(gamma={gamma})"),
            ModelKind::Custom(name) => write!(f, "custom({name})"),
        }
    }
}

/// Coefficients `p, g, f` and damping `alpha` of the general system.
#[derive(Clone)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub alpha: f64,
    pressure: ScalarMap,
    pressure_deriv: ScalarMap,
    flux_g: ScalarMap,
    flux_g_deriv: ScalarMap,
    flux_f: ScalarMap,
    flux_f_deriv: ScalarMap,
    /// Closed interval of admissible velocities.
    pub admissible_u: (f64, f64),
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("kind", &self.kind)
            .field("alpha", &self.alpha)
            .field("admissible_u", &self.admissible_u)
            .finish_non_exhaustive()
    }
}

/// Sample points used to validate `p' < 0` at construction.
const VALIDATION_VOLUMES: (f64, f64, usize) = (0.1, 10.0, 200);

impl ModelSpec {
    /// The M1 model with opacity `sigma`.
    pub fn m1(sigma: f64) -> Result<Self> {
        check_alpha(sigma)?;
        Ok(Self {
            kind: ModelKind::M1,
            alpha: sigma,
            pressure: Arc::new(|v| 1.0 / (3.0 * v)),
            pressure_deriv: Arc::new(|v| -1.0 / (3.0 * v * v)),
            flux_g: Arc::new(m1_g_unchecked),
            flux_g_deriv: Arc::new(m1_g_deriv_unchecked),
            flux_f: Arc::new(|v| 1.0 / v),
            flux_f_deriv: Arc::new(|v| -1.0 / (v * v)),
            admissible_u: (-1.0, 1.0),
        })
    }

    /// Damped p-system with `p(v) = v^-gamma` and no `(g f)_x` term.
    pub fn gamma_law(gamma: f64, alpha: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain {
                what: "gamma",
                value: gamma,
                domain: "gamma > 0",
            });
        }
        check_alpha(alpha)?;
        let zero: ScalarMap = Arc::new(|_| 0.0);
        Ok(Self {
            kind: ModelKind::GammaLaw { gamma },
            alpha,
            pressure: Arc::new(move |v: f64| v.powf(-gamma)),
            pressure_deriv: Arc::new(move |v: f64| -gamma * v.powf(-gamma - 1.0)),
            flux_g: zero.clone(),
            flux_g_deriv: zero.clone(),
            flux_f: zero.clone(),
            flux_f_deriv: zero,
            admissible_u: (f64::NEG_INFINITY, f64::INFINITY),
        })
    }

    /// A user-supplied model, validated against `p' < 0` and `g(0) = g'(0) = 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        name: impl Into<String>,
        alpha: f64,
        pressure: ScalarMap,
        pressure_deriv: ScalarMap,
        flux_g: ScalarMap,
        flux_g_deriv: ScalarMap,
        flux_f: ScalarMap,
        flux_f_deriv: ScalarMap,
        admissible_u: (f64, f64),
    ) -> Result<Self> {
        check_alpha(alpha)?;
        if !(admissible_u.0 < 0.0 && admissible_u.1 > 0.0) {
            return Err(Error::Model(
                "admissible velocity interval must contain 0 in its interior".into(),
            ));
        }
        let spec = Self {
            kind: ModelKind::Custom(name.into()),
            alpha,
            pressure,
            pressure_deriv,
            flux_g,
            flux_g_deriv,
            flux_f,
            flux_f_deriv,
            admissible_u,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the structural assumptions on a sample of volumes.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi, n) = VALIDATION_VOLUMES;
        for i in 0..n {
            let v = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
            let dp = self.p_deriv(v);
            if !(dp < 0.0) {
                return Err(Error::Model(format!("p'({v}) = {dp} is not negative")));
            }
        }
        let (g0, dg0) = (self.g(0.0), self.g_deriv(0.0));
        if g0.abs() > 1e-12 || dg0.abs() > 1e-12 {
            return Err(Error::Model(format!(
                "flux law must satisfy g(0) = g'(0) = 0, got {g0:e}, {dg0:e}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn p(&self, v: f64) -> f64 {
        (self.pressure)(v)
    }

    #[inline]
    pub fn p_deriv(&self, v: f64) -> f64 {
        (self.pressure_deriv)(v)
    }

    #[inline]
    pub fn g(&self, u: f64) -> f64 {
        (self.flux_g)(u)
    }

    #[inline]
    pub fn g_deriv(&self, u: f64) -> f64 {
        (self.flux_g_deriv)(u)
    }

    #[inline]
    pub fn f(&self, v: f64) -> f64 {
        (self.flux_f)(v)
    }

    #[inline]
    pub fn f_deriv(&self, v: f64) -> f64 {
        (self.flux_f_deriv)(v)
    }

    /// Whether the model carries a nontrivial `(g f)_x` term.
    pub fn has_flux_term(&self) -> bool {
        !matches!(self.kind, ModelKind::GammaLaw { .. })
    }

    /// Diffusivity `-p'(v)` of the linearised parabolic problem.
    pub fn diffusivity(&self, v: f64) -> f64 {
        -self.p_deriv(v)
    }

    pub fn is_admissible(&self, u: f64) -> bool {
        u >= self.admissible_u.0 && u <= self.admissible_u.1
    }

    /// Momentum flux `p(v) - g(u) f(v)`.
    #[inline]
    pub fn momentum_flux(&self, v: f64, u: f64) -> f64 {
        self.p(v) - self.g(u) * self.f(v)
    }

    /// Spectral radius of the flux Jacobian of `(-u, p(v) - g(u) f(v))`.
    #[inline]
    pub fn spectral_radius(&self, v: f64, u: f64) -> f64 {
        let trace = -self.g_deriv(u) * self.f(v);
        let det = self.p_deriv(v) - self.g(u) * self.f_deriv(v);
        let disc = trace * trace - 4.0 * det;
        if disc >= 0.0 {
            let r = disc.sqrt();
            ((trace + r).abs()).max((trace - r).abs()) * 0.5
        } else {
            // complex pair; the modulus still bounds signal speeds
            det.abs().sqrt()
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "alpha",
            value: alpha,
            domain: "alpha > 0",
        })
    }
}

/// Convenience constructor mirroring the config name `gamma-law`.
pub fn gamma_law_model(gamma: f64, alpha: f64) -> Result<ModelSpec> {
    ModelSpec::gamma_law(gamma, alpha)
}
