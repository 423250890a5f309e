//! Heat kernels of the linearized parabolic problem `V_t = D V_xx`, `D = -p'(v_plus)`.
//!
//! On the half-line with `V(0, t) = 0` the kernel follows from the method of images,
//!
//! ```text
//!     G(x, t; y) = (4 pi D t)^{-1/2} (exp(-(x - y)^2 / 4Dt) - exp(-(x + y)^2 / 4Dt)).
//! ```

use std::f64::consts::PI;

use crate::closure::ModelSpec;
use crate::decay::{fit_exponent, DecayFit, FitWindow};
use crate::error::{Error, Result};
use crate::grid::{Boundary, End, Field};
use crate::perturbation::PerturbationSnapshot;
use crate::profiles::ProfileBundle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernel {
    diffusivity: f64,
}

impl HeatKernel {
    pub fn new(diffusivity: f64) -> Result<Self> {
        if !(diffusivity > 0.0 && diffusivity.is_finite()) {
            return Err(Error::Domain {
                what: "diffusivity",
                value: diffusivity,
                domain: "D > 0",
            });
        }
        Ok(Self { diffusivity })
    }

    /// Kernel of the model linearized at `v_plus`.
    pub fn for_model(model: &ModelSpec, v_plus: f64) -> Result<Self> {
        Self::new(model.diffusivity(v_plus))
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    /// Half-line Dirichlet kernel `G(x, t; y)`.
    pub fn kernel(&self, x: f64, t: f64, y: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.kernel_unchecked(x, t, y))
    }

    #[inline]
    fn kernel_unchecked(&self, x: f64, t: f64, y: f64) -> f64 {
        let four_dt = 4.0 * self.diffusivity * t;
        let c = 1.0 / (PI * four_dt).sqrt();
        c * ((-(x - y).powi(2) / four_dt).exp() - (-(x + y).powi(2) / four_dt).exp())
    }

    /// `int_0^inf G(x, t; y) dy = erf(x / (2 sqrt(D t)))`.
    pub fn kernel_mass(&self, x: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(libm::erf(x / (2.0 * (self.diffusivity * t).sqrt())))
    }

    /// `d_x^k d_t^j` of the whole-line Gaussian `(4 pi D t)^{-1/2} exp(-x^2/4Dt)`.
    ///
    /// With `s^2 = 2 D t`, `d_x^n` of the Gaussian is `(-1/s)^n He_n(x/s)` times it,
    /// and `d_t = D d_x^2`.
    pub fn gaussian_derivative(&self, k: usize, j: usize, x: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        let n = k + 2 * j;
        let s = (2.0 * self.diffusivity * t).sqrt();
        let xi = x / s;
        let base = (-0.5 * xi * xi).exp() / (s * (2.0 * PI).sqrt());
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(self.diffusivity.powi(j as i32) * sign * hermite_he(n, xi) * base / s.powi(n as i32))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::Domain {
            what: "t",
            value: t,
            domain: "t > 0",
        });
    }
    Ok(())
}

/// Probabilists' Hermite polynomial `He_n`.
pub fn hermite_he(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for m in 1..n {
        let next = x * cur - m as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Expected exponent `-(1/2)(1 - 1/p) - k/2 - j` of `||d_x^k d_t^j G(t)||_p`.
pub fn kernel_exponent(k: usize, j: usize, p: f64) -> f64 {
    -0.5 * (1.0 - 1.0 / p) - 0.5 * k as f64 - j as f64
}

/// Whole-line `L^p` norm (`p = inf` allowed) of `d_x^k d_t^j` of the Gaussian.
pub fn gaussian_norm(kernel: &HeatKernel, k: usize, j: usize, p: f64, t: f64) -> Result<f64> {
    if k + j > 2 {
        return Err(Error::DerivativeOrder { k, j });
    }
    if !(p >= 1.0) {
        return Err(Error::Domain {
            what: "p",
            value: p,
            domain: "1 <= p <= inf",
        });
    }
    let s = (2.0 * kernel.diffusivity * t).sqrt();
    // the integrand lives within 14 s of the origin to double precision
    let half_width = 14.0 * s;
    let m = 8192;
    let h = 2.0 * half_width / m as f64;
    let mut acc = 0.0f64;
    for i in 0..m {
        let x = -half_width + (i as f64 + 0.5) * h;
        let g = kernel.gaussian_derivative(k, j, x, t)?.abs();
        if p.is_infinite() {
            acc = acc.max(g);
        } else {
            acc += g.powf(p) * h;
        }
    }
    Ok(if p.is_infinite() { acc } else { acc.powf(1.0 / p) })
}

/// Fitted decay exponent of `||d_x^k d_t^j G(t)||_p` over `times`.
///
/// Needs `k + j <= 2` and times spanning at least two decades.
pub fn kernel_norm_scaling(kernel: &HeatKernel, k: usize, j: usize, p: f64, times: &[f64]) -> Result<DecayFit> {
    if k + j > 2 {
        return Err(Error::DerivativeOrder { k, j });
    }
    let (t_min, t_max) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InsufficientSamples { need: 2, got: 0 }),
    };
    if !(t_min > 0.0) || t_max / t_min < 100.0 * (1.0 - 1e-12) {
        return Err(Error::InsufficientSpan {
            t_min,
            t_max,
            decades: 2.0,
        });
    }
    let series = times
        .iter()
        .map(|&t| Ok((t, gaussian_norm(kernel, k, j, p, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut fit = fit_exponent(&series, FitWindow::new(t_min, t_max))?;
    fit.quantity = format!("d_x^{k} d_t^{j} G [L{}]", if p.is_infinite() { "inf".into() } else { format!("{p}") });
    fit.expected = Some(kernel_exponent(k, j, p));
    Ok(fit)
}

/// `J1(x, t) = int_0^inf G(x, t; y) data(y) dy`.
///
/// Midpoint quadrature over the grid plus the exact contribution of
/// `y > L`, where the data is taken constant at its last value. When
/// `sqrt(D t)` is below a tenth of a cell the kernel acts as the identity.
pub fn propagate_initial(kernel: &HeatKernel, data: &Field, t: f64) -> Result<Field> {
    check_time(t)?;
    let grid = *data.grid();
    let dx = grid.dx();
    let spread = (kernel.diffusivity * t).sqrt();
    if spread < 0.1 * dx {
        return Ok(data.clone());
    }
    let support: Vec<(f64, f64)> = data
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &f)| f != 0.0)
        .map(|(j, &f)| (grid.x(j), f * dx))
        .collect();
    let far = data.values()[grid.cells() - 1];
    let length = grid.length();
    let two_spread = 2.0 * spread;
    let values = grid
        .centers()
        .map(|x| {
            let mut acc: f64 = support.iter().map(|&(y, w)| w * kernel.kernel_unchecked(x, t, y)).sum();
            if far != 0.0 {
                acc += far
                    * 0.5
                    * (libm::erfc((length - x) / two_spread) - libm::erfc((length + x) / two_spread));
            }
            acc
        })
        .collect();
    Field::from_values(grid, values)
}

/// Residual of the linearization around `v_plus`,
/// `alpha V_t + p'(v_plus) V_xx + V_tt - F1 - F2 - ((p'(v_plus) - p'(vbar)) V_x)_x`.
pub fn linearized_residual(snapshot: &PerturbationSnapshot, profiles: &ProfileBundle, model: &ModelSpec) -> Result<Field> {
    let td = snapshot.time_derivatives()?;
    let dp_plus = model.p_deriv(profiles.v_plus);
    let correction = profiles
        .vbar
        .zip_map(&snapshot.big_v_x, |vb, vx| (dp_plus - model.p_deriv(vb)) * vx)
        .ddx(Boundary::new(End::Even, End::OneSided));
    let lhs = &(&td.v_t.scale(model.alpha) + &snapshot.big_v_xx.scale(dp_plus)) + &td.v_tt;
    let forcing = &(&snapshot.f1 + &snapshot.f2) + &correction;
    Ok(&lhs - &forcing)
}
