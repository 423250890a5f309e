//! Asymptotic profiles: the nonlinear diffusion wave and the exponentially
//! decaying correction that carries the far-field velocity.
//!
//! The diffusion wave solves the Darcy-law reduction
//!
//! ```text
//!     vbar_t = -(1/alpha) p(vbar)_xx,   ubar = -(1/alpha) p(vbar)_x,
//!     vbar_x(0, t) = 0,                 vbar -> v_plus as x -> inf,
//! ```
//!
//! from `vbar(x, 0) = v_plus + delta0 phi0(x)`. The correction pair is
//! `vhat = -(u_plus/alpha) e^{-alpha t} m0(x)`,
//! `uhat = u_plus e^{-alpha t} int_0^x m0`.

use crate::closure::ModelSpec;
use crate::decay::{fit_exponent, theorem_table, DecayFit, FitWindow, Quantity, Subject, TheoremId};
use crate::error::{Error, Result};
use crate::grid::{Boundary, End, Field, HalfLineGrid, NormKind};

/// `delta0` making the perturbation `v - vbar - vhat` massless at `t = 0`.
pub fn compute_delta0(v0: &Field, v_plus: f64, phi0: &Field, u_plus: f64, alpha: f64) -> Result<f64> {
    let phi_mass = phi0.integrate();
    if phi_mass == 0.0 || phi_mass.abs() < 1e-14 * phi0.l1() {
        return Err(Error::ZeroIntegral);
    }
    let excess = v0.map(|v| v - v_plus).integrate();
    Ok((excess + u_plus / alpha) / phi_mass)
}

/// Default diffusion-wave shape `exp(-(x - 2)^2 / 4)`.
pub fn default_phi0(grid: &HalfLineGrid) -> Field {
    gaussian_phi0(grid, 2.0, 2.0)
}

/// `exp(-(x - center)^2 / width^2)`.
pub fn gaussian_phi0(grid: &HalfLineGrid, center: f64, width: f64) -> Field {
    grid.sample(|x| {
        let s = (x - center) / width;
        (-s * s).exp()
    })
}

/// Smooth bump `exp(-1/(s(1-s)))`, `s = x / support_right`, with unit discrete integral.
pub fn bump_m0(grid: &HalfLineGrid, support_right: f64) -> Result<Field> {
    if !(support_right > 0.0) {
        return Err(Error::Domain {
            what: "support_right",
            value: support_right,
            domain: "> 0",
        });
    }
    if support_right > grid.length() {
        return Err(Error::SupportExceedsGrid {
            support: support_right,
            length: grid.length(),
        });
    }
    let raw = grid.sample(|x| {
        let s = x / support_right;
        if s <= 0.0 || s >= 1.0 {
            0.0
        } else {
            (-1.0 / (s * (1.0 - s))).exp()
        }
    });
    let mass = raw.integrate();
    if mass <= 0.0 {
        return Err(Error::Grid(format!(
            "support {support_right} holds no cell centre on this grid"
        )));
    }
    Ok(raw.scale(1.0 / mass))
}

/// Parameters of the correction pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub u_plus: f64,
    pub alpha: f64,
    pub m0: Field,
}

impl Correction {
    pub fn new(u_plus: f64, alpha: f64, m0: Field) -> Self {
        Self { u_plus, alpha, m0 }
    }

    pub fn at(&self, t: f64) -> (Field, Field) {
        correction_pair(self.u_plus, self.alpha, &self.m0, t)
    }
}

/// `(vhat, uhat)` at time `t`.
pub fn correction_pair(u_plus: f64, alpha: f64, m0: &Field, t: f64) -> (Field, Field) {
    let amp = u_plus * (-alpha * t).exp();
    let vhat = m0.scale(-amp / alpha);
    let uhat = m0.cumulative_integrals().scale(amp);
    (vhat, uhat)
}

/// Norm ratios of the correction against `exp(-alpha t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionDecayCheck {
    pub quantity: Quantity,
    pub t: f64,
    /// `|norm(t) / (norm(0) e^{-alpha t}) - 1|`.
    pub relative_error: f64,
}

/// Checks every Lp norm of `vhat`, `d_x vhat`, `d_x uhat` against `e^{-alpha t}`.
pub fn verify_correction_decay(correction: &Correction, times: &[f64]) -> Vec<CorrectionDecayCheck> {
    let fields = |t: f64| -> Vec<(Quantity, Field)> {
        let (vhat, uhat) = correction.at(t);
        let b = Boundary::ONE_SIDED;
        let mut out = Vec::new();
        for norm in NormKind::ALL {
            out.push((Quantity::new(Subject::VHat, 0, 0, norm), vhat.clone()));
            out.push((Quantity::new(Subject::VHat, 1, 0, norm), vhat.ddx(b)));
            out.push((Quantity::new(Subject::UHat, 1, 0, norm), uhat.ddx(b)));
        }
        out
    };
    let reference = fields(0.0);
    let mut checks = Vec::new();
    for &t in times {
        let decay = (-correction.alpha * t).exp();
        for ((q, f), (_, f0)) in fields(t).iter().zip(&reference) {
            let n0 = f0.norm(q.norm);
            let nt = f.norm(q.norm);
            let relative_error = if n0 == 0.0 {
                nt
            } else {
                (nt / (n0 * decay) - 1.0).abs()
            };
            checks.push(CorrectionDecayCheck {
                quantity: *q,
                t,
                relative_error,
            });
        }
    }
    checks
}

/// Initial data of the diffusion wave.
#[derive(Debug, Clone)]
pub struct DiffusionWaveSetup {
    pub v_plus: f64,
    pub delta0: f64,
    pub phi0: Field,
    pub model: ModelSpec,
}

impl DiffusionWaveSetup {
    pub fn new(v_plus: f64, delta0: f64, phi0: Field, model: ModelSpec) -> Result<Self> {
        if !(v_plus > 0.0) {
            return Err(Error::Vacuum { x: f64::INFINITY, v: v_plus });
        }
        if phi0.integrate() == 0.0 {
            return Err(Error::ZeroIntegral);
        }
        let setup = Self {
            v_plus,
            delta0,
            phi0,
            model,
        };
        let initial = setup.initial_profile();
        if let Some(j) = initial.values().iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Vacuum {
                x: initial.grid().x(j),
                v: initial.values()[j],
            });
        }
        Ok(setup)
    }

    pub fn grid(&self) -> &HalfLineGrid {
        self.phi0.grid()
    }

    pub fn alpha(&self) -> f64 {
        self.model.alpha
    }

    /// `vbar(x, 0) = v_plus + delta0 phi0(x)`.
    pub fn initial_profile(&self) -> Field {
        self.phi0.map(|phi| self.v_plus + self.delta0 * phi)
    }
}

/// Time stepping controls for the implicit profile solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSolverOptions {
    /// Target ratio `dt / t` once the geometric phase starts.
    pub growth: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Newton stops once the update is below this (absolute, in `v`).
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Combine one step of `dt` with two of `dt/2` (second order in time).
    pub extrapolate: bool,
}

impl Default for ProfileSolverOptions {
    fn default() -> Self {
        Self {
            growth: 5e-3,
            dt_min: 1e-3,
            dt_max: f64::INFINITY,
            newton_tol: 1e-14,
            max_newton: 40,
            extrapolate: true,
        }
    }
}

/// Diffusion wave, correction and their derivatives at one time.
#[derive(Debug, Clone)]
pub struct ProfileBundle {
    pub t: f64,
    pub v_plus: f64,
    pub alpha: f64,
    pub vbar: Field,
    pub ubar: Field,
    pub vbar_x: Field,
    pub vbar_xx: Field,
    pub vbar_xxx: Field,
    /// From the parabolic right-hand side, not from time differencing.
    pub vbar_t: Field,
    pub vbar_xt: Field,
    pub vbar_xxt: Field,
    /// `-(1/alpha) (p'(vbar) vbar_t)_x`.
    pub ubar_t: Field,
    pub vhat: Field,
    pub uhat: Field,
}

impl ProfileBundle {
    fn assemble(t: f64, vbar: Field, setup: &DiffusionWaveSetup, correction: Option<&Correction>) -> Self {
        let model = &setup.model;
        let alpha = model.alpha;
        let grid = *vbar.grid();
        let even = Boundary::new(End::Even, End::OneSided);
        let odd = Boundary::new(End::Odd, End::OneSided);
        let q = vbar.map(|v| model.p(v));
        let n = grid.cells();
        // Dirichlet face at L: ghost = 2 * far value - last cell
        let q_ghost = 2.0 * model.p(setup.v_plus) - q.values()[n - 1];
        let v_ghost = 2.0 * setup.v_plus - vbar.values()[n - 1];
        let ubar = q.ddx(Boundary::new(End::Even, End::Ghost(q_ghost))).scale(-1.0 / alpha);
        let vbar_x = vbar.ddx(Boundary::new(End::Even, End::Ghost(v_ghost)));
        let vbar_xx = vbar_x.ddx(odd);
        let vbar_xxx = vbar_xx.ddx(even);
        let vbar_t = Field::from_values_unchecked(grid, parabolic_rhs(q.values(), model.p(setup.v_plus), grid.dx(), alpha));
        let vbar_xt = vbar_t.ddx(even);
        let vbar_xxt = vbar_xt.ddx(odd);
        let flux_t = vbar.zip_map(&vbar_t, |v, vt| model.p_deriv(v) * vt);
        let ubar_t = flux_t.ddx(even).scale(-1.0 / alpha);
        let (vhat, uhat) = match correction {
            Some(c) => c.at(t),
            None => (grid.zeros(), grid.zeros()),
        };
        Self {
            t,
            v_plus: setup.v_plus,
            alpha,
            vbar,
            ubar,
            vbar_x,
            vbar_xx,
            vbar_xxx,
            vbar_t,
            vbar_xt,
            vbar_xxt,
            ubar_t,
            vhat,
            uhat,
        }
    }

    /// Flat profile `vbar = v_plus`, `ubar = 0`, no correction.
    pub fn flat(grid: HalfLineGrid, t: f64, v_plus: f64, alpha: f64) -> Self {
        let zero = grid.zeros();
        Self {
            t,
            v_plus,
            alpha,
            vbar: grid.constant(v_plus),
            ubar: zero.clone(),
            vbar_x: zero.clone(),
            vbar_xx: zero.clone(),
            vbar_xxx: zero.clone(),
            vbar_t: zero.clone(),
            vbar_xt: zero.clone(),
            vbar_xxt: zero.clone(),
            ubar_t: zero.clone(),
            vhat: zero.clone(),
            uhat: zero,
        }
    }

    pub fn grid(&self) -> &HalfLineGrid {
        self.vbar.grid()
    }

    /// `d_x^k d_t^j (vbar - v_plus)` for `k <= 2`, `j <= 1`.
    pub fn deviation_derivative(&self, k: usize, j: usize) -> Result<Field> {
        Ok(match (k, j) {
            (0, 0) => self.vbar.map(|v| v - self.v_plus),
            (1, 0) => self.vbar_x.clone(),
            (2, 0) => self.vbar_xx.clone(),
            (3, 0) => self.vbar_xxx.clone(),
            (0, 1) => self.vbar_t.clone(),
            (1, 1) => self.vbar_xt.clone(),
            (2, 1) => self.vbar_xxt.clone(),
            _ => return Err(Error::DerivativeOrder { k, j }),
        })
    }

    pub fn vhat_t(&self) -> Field {
        self.vhat.scale(-self.alpha)
    }

    pub fn uhat_t(&self) -> Field {
        self.uhat.scale(-self.alpha)
    }

    /// Excess mass `int (vbar - v_plus)`.
    pub fn excess_mass(&self) -> f64 {
        self.vbar.map(|v| v - self.v_plus).integrate()
    }
}

/// `-(1/alpha) q_xx` with the mirror ghost at the wall and a Dirichlet face at `L`.
fn parabolic_rhs(q: &[f64], q_plus: f64, dx: f64, alpha: f64) -> Vec<f64> {
    let n = q.len();
    let c = -1.0 / (alpha * dx * dx);
    let mut out = vec![0.0; n];
    out[0] = c * (q[1] - q[0]);
    for j in 1..n - 1 {
        out[j] = c * (q[j + 1] - 2.0 * q[j] + q[j - 1]);
    }
    out[n - 1] = c * (2.0 * (q_plus - q[n - 1]) + (q[n - 2] - q[n - 1]));
    out
}

/// Implicit conservative solver for the diffusion wave.
struct ParabolicStepper<'a> {
    model: &'a ModelSpec,
    v_plus: f64,
    dx: f64,
    opts: ProfileSolverOptions,
    // scratch
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
}

impl<'a> ParabolicStepper<'a> {
    fn new(model: &'a ModelSpec, v_plus: f64, grid: &HalfLineGrid, opts: ProfileSolverOptions) -> Self {
        let n = grid.cells();
        Self {
            model,
            v_plus,
            dx: grid.dx(),
            opts,
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    /// One backward-Euler step on the deviation `w = v - v_plus`.
    fn backward_euler(&mut self, w_old: &[f64], dt: f64, t: f64) -> Result<Vec<f64>> {
        let n = w_old.len();
        let alpha = self.model.alpha;
        let c = dt / (alpha * self.dx * self.dx);
        let q_plus = self.model.p(self.v_plus);
        let mut w = w_old.to_vec();
        let mut q = vec![0.0; n];
        let mut dq = vec![0.0; n];
        for iter in 0..self.opts.max_newton {
            for j in 0..n {
                let v = self.v_plus + w[j];
                if !(v > 0.0) {
                    return Err(Error::Positivity { t });
                }
                q[j] = self.model.p(v);
                dq[j] = self.model.p_deriv(v);
            }
            // residual R = w - w_old + c * lap(q), lap with mirror / Dirichlet ghosts
            let lap = |j: usize| -> f64 {
                if j == 0 {
                    q[1] - q[0]
                } else if j == n - 1 {
                    2.0 * (q_plus - q[n - 1]) + (q[n - 2] - q[n - 1])
                } else {
                    q[j + 1] - 2.0 * q[j] + q[j - 1]
                }
            };
            let mut res_max = 0.0f64;
            for j in 0..n {
                let r = w[j] - w_old[j] + c * lap(j);
                self.rhs[j] = -r;
                res_max = res_max.max(r.abs());
            }
            for j in 0..n {
                let centre = if j == 0 {
                    -1.0
                } else if j == n - 1 {
                    -3.0
                } else {
                    -2.0
                };
                self.diag[j] = 1.0 + c * centre * dq[j];
                self.lower[j] = if j > 0 { c * dq[j - 1] } else { 0.0 };
                self.upper[j] = if j + 1 < n { c * dq[j + 1] } else { 0.0 };
            }
            let delta = solve_tridiagonal(&self.lower, &self.diag, &self.upper, &self.rhs);
            let mut step_max = 0.0f64;
            for j in 0..n {
                w[j] += delta[j];
                step_max = step_max.max(delta[j].abs());
            }
            if !step_max.is_finite() {
                return Err(Error::Newton { t, residual: res_max });
            }
            if step_max <= self.opts.newton_tol * (1.0 + self.v_plus) || (iter > 0 && res_max == 0.0) {
                return Ok(w);
            }
        }
        Err(Error::Newton {
            t,
            residual: f64::NAN,
        })
    }

    fn step(&mut self, w: &[f64], dt: f64, t: f64) -> Result<Vec<f64>> {
        if !self.opts.extrapolate {
            return self.backward_euler(w, dt, t);
        }
        let coarse = self.backward_euler(w, dt, t)?;
        let half = self.backward_euler(w, 0.5 * dt, t)?;
        let fine = self.backward_euler(&half, 0.5 * dt, t + 0.5 * dt)?;
        let out: Vec<f64> = fine.iter().zip(&coarse).map(|(f, c)| 2.0 * f - c).collect();
        if out.iter().any(|&wj| !(self.v_plus + wj > 0.0)) {
            return Err(Error::Positivity { t });
        }
        Ok(out)
    }
}

/// Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored.
pub(crate) fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Integrates the diffusion wave and returns a bundle at every output time.
///
/// Steps are `dt = clamp(growth * t, dt_min, dt_max)`, shortened to land on
/// each requested time. A step that loses positivity or whose Newton
/// iteration stalls is retried with half the step.
pub fn solve_diffusion_wave(
    setup: &DiffusionWaveSetup,
    correction: Option<&Correction>,
    output_times: &[f64],
    opts: &ProfileSolverOptions,
) -> Result<Vec<ProfileBundle>> {
    if output_times.windows(2).any(|w| w[1] <= w[0]) || output_times.iter().any(|&t| t < 0.0) {
        return Err(Error::Mismatch("output times must be nonnegative and increasing".into()));
    }
    let grid = *setup.grid();
    let mut stepper = ParabolicStepper::new(&setup.model, setup.v_plus, &grid, *opts);
    let mut w: Vec<f64> = setup.phi0.values().iter().map(|phi| setup.delta0 * phi).collect();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(output_times.len());
    let to_field = |w: &[f64]| Field::from_values_unchecked(grid, w.iter().map(|wj| setup.v_plus + wj).collect());

    for &target in output_times {
        while t < target {
            let mut dt = (opts.growth * t).clamp(opts.dt_min, opts.dt_max).min(target - t);
            // avoid a sliver step right before an output time
            if target - t - dt < 1e-3 * dt {
                dt = target - t;
            }
            let mut attempts = 0;
            loop {
                match stepper.step(&w, dt, t) {
                    Ok(next) => {
                        w = next;
                        break;
                    }
                    Err(e @ (Error::Positivity { .. } | Error::Newton { .. })) => {
                        attempts += 1;
                        if attempts > 20 {
                            return Err(e);
                        }
                        dt *= 0.5;
                    }
                    Err(e) => return Err(e),
                }
            }
            t = if (target - (t + dt)).abs() <= 1e-12 * target.max(1.0) {
                target
            } else {
                t + dt
            };
        }
        out.push(ProfileBundle::assemble(target, to_field(&w), setup, correction));
    }
    Ok(out)
}

/// Fits every Lemma-2.1 exponent from a sequence of bundles.
///
/// Needs at least 10 bundles with positive times spanning two decades.
pub fn verify_profile_decay(bundles: &[ProfileBundle], window: Option<FitWindow>) -> Result<Vec<DecayFit>> {
    let positive: Vec<&ProfileBundle> = bundles.iter().filter(|b| b.t > 0.0).collect();
    if positive.len() < 10 {
        return Err(Error::InsufficientSamples {
            need: 10,
            got: positive.len(),
        });
    }
    let (t_min, t_max) = (positive[0].t, positive[positive.len() - 1].t);
    if t_max / t_min < 100.0 * (1.0 - 1e-12) {
        return Err(Error::InsufficientSpan {
            t_min,
            t_max,
            decades: 2.0,
        });
    }
    let times: Vec<f64> = positive.iter().map(|b| b.t).collect();
    let window = window.unwrap_or_else(|| FitWindow::default_for(&times));
    let table = theorem_table(TheoremId::Lemma21);
    let mut fits = Vec::new();
    for q in table.entries.keys() {
        let series: Vec<(f64, f64)> = positive
            .iter()
            .map(|b| Ok((b.t, b.deviation_derivative(q.k, q.j)?.norm(q.norm))))
            .collect::<Result<_>>()?;
        let mut fit = fit_exponent(&series, window)?;
        fit.quantity = q.name();
        fit.expected = table.power(q);
        fits.push(fit);
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> HalfLineGrid {
        HalfLineGrid::new(40.0, 400).unwrap()
    }

    #[test]
    fn delta0_examples() {
        let g = grid();
        let phi = g.constant(1.0).scale(1.0 / 40.0); // unit integral
        let v0 = g.constant(1.0);
        assert!((compute_delta0(&v0, 1.0, &phi, 0.5, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(compute_delta0(&v0, 1.0, &phi, 0.0, 1.0).unwrap(), 0.0);
        let v0 = g.sample(|x| 1.0 + if x < 2.0 { 0.1 } else { 0.0 }); // excess 0.2
        let phi2 = phi.scale(2.0);
        assert!((compute_delta0(&v0, 1.0, &phi2, 0.0, 1.0).unwrap() - 0.1).abs() < 1e-14);
        assert!(matches!(
            compute_delta0(&v0, 1.0, &g.sample(|x| x - 20.0), 0.0, 1.0),
            Err(Error::ZeroIntegral)
        ));
    }

    #[test]
    fn bump_properties() {
        let g = grid();
        let m0 = bump_m0(&g, 2.0).unwrap();
        assert!((m0.integrate() - 1.0).abs() < 1e-15);
        assert!(m0.values().iter().all(|&m| m >= 0.0));
        assert_eq!(m0.values()[g.cells() - 1], 0.0);
        let dx = g.dx();
        // vanishes at both ends of its support
        assert!(m0.values()[0] < 1e-10);
        assert_eq!(m0.values()[(2.0 / dx) as usize], 0.0);
        assert!(matches!(bump_m0(&g, 41.0), Err(Error::SupportExceedsGrid { .. })));
    }

    #[test]
    fn correction_examples() {
        let g = grid();
        let m0 = bump_m0(&g, 2.0).unwrap();
        let (vh, uh) = correction_pair(0.0, 1.0, &m0, 0.3);
        assert!(vh.values().iter().all(|&x| x == 0.0));
        assert!(uh.values().iter().all(|&x| x == 0.0));

        let (u_plus, alpha, t) = (0.3, 0.7, 1.5);
        let (vh, uh) = correction_pair(u_plus, alpha, &m0, t);
        let far = uh.values()[g.cells() - 1];
        assert!((far - u_plus * (-alpha * t).exp()).abs() < 1e-15);
        assert!(uh.values()[0] < 1e-15);
        // vhat_t - uhat_x = 0 up to O(dx^2)
        let vt = vh.scale(-alpha);
        let ux = uh.ddx(Boundary::ONE_SIDED);
        let residual = (&vt - &ux).linf();
        assert!(residual < 5e-3, "{residual}");
    }

    #[test]
    fn correction_residual_is_second_order() {
        let res = |n: usize| {
            let g = HalfLineGrid::new(4.0, n).unwrap();
            let m0 = bump_m0(&g, 2.0).unwrap();
            let (vh, uh) = correction_pair(1.0, 1.0, &m0, 0.0);
            (&vh.scale(-1.0) - &uh.ddx(Boundary::ONE_SIDED)).l2()
        };
        let ratio = res(200) / res(400);
        assert!(ratio > 3.8, "{ratio}");
    }

    #[test]
    fn correction_norms_decay_exactly_exponentially() {
        let g = grid();
        let c = Correction::new(0.4, 1.3, bump_m0(&g, 2.0).unwrap());
        let checks = verify_correction_decay(&c, &[0.5, 2.0, 7.5, 20.0]);
        assert!(!checks.is_empty());
        for chk in &checks {
            assert!(chk.relative_error <= 1e-12, "{chk:?}");
        }
    }

    fn m1_setup(delta0: f64, g: &HalfLineGrid) -> DiffusionWaveSetup {
        DiffusionWaveSetup::new(1.0, delta0, default_phi0(g), ModelSpec::m1(1.0).unwrap()).unwrap()
    }

    #[test]
    fn zero_amplitude_is_a_fixed_point() {
        let g = grid();
        let setup = m1_setup(0.0, &g);
        let b = solve_diffusion_wave(&setup, None, &[0.0, 1.0, 10.0], &ProfileSolverOptions::default()).unwrap();
        for bundle in &b {
            assert!(bundle.vbar.values().iter().all(|&v| v == 1.0));
            assert!(bundle.ubar.values().iter().all(|&u| u == 0.0));
        }
    }

    #[test]
    fn excess_mass_is_conserved() {
        let g = HalfLineGrid::new(80.0, 800).unwrap();
        let setup = m1_setup(0.05, &g);
        let b = solve_diffusion_wave(&setup, None, &[0.0, 1.0, 10.0, 100.0], &ProfileSolverOptions::default()).unwrap();
        let m0 = b[0].excess_mass();
        for bundle in &b {
            assert!((bundle.excess_mass() - m0).abs() <= 1e-10 * 0.05, "{}", bundle.excess_mass() - m0);
        }
    }

    #[test]
    fn maximum_principle_and_wall_flux() {
        let g = HalfLineGrid::new(60.0, 600).unwrap();
        let setup = m1_setup(0.05, &g);
        let init = setup.initial_profile();
        let (lo, hi) = (init.min(), init.max());
        let b = solve_diffusion_wave(&setup, None, &[0.5, 5.0, 50.0], &ProfileSolverOptions::default()).unwrap();
        for bundle in &b {
            assert!(bundle.vbar.min() >= lo - 1e-12 && bundle.vbar.max() <= hi + 1e-12);
            assert!(bundle.ubar.value_at_wall().abs() < 1e-4);
        }
    }

    #[test]
    fn positivity_is_checked_at_setup() {
        let g = grid();
        let r = DiffusionWaveSetup::new(1.0, -2.0, default_phi0(&g), ModelSpec::m1(1.0).unwrap());
        assert!(matches!(r, Err(Error::Vacuum { .. })));
    }

    #[test]
    fn tridiagonal_solver() {
        let lower = [0.0, 1.0, 1.0, 1.0];
        let diag = [4.0, 4.0, 4.0, 4.0];
        let upper = [1.0, 1.0, 1.0, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                diag[i] * x[i]
                    + if i > 0 { lower[i] * x[i - 1] } else { 0.0 }
                    + if i < 3 { upper[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        let sol = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        for (a, b) in sol.iter().zip(x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn time_extrapolation_is_second_order() {
        // compare against a fine reference at t = 1
        let g = HalfLineGrid::new(30.0, 300).unwrap();
        let setup = m1_setup(0.2, &g);
        let run = |dt: f64, extrapolate: bool| {
            let opts = ProfileSolverOptions {
                growth: 0.0,
                dt_min: dt,
                extrapolate,
                ..Default::default()
            };
            solve_diffusion_wave(&setup, None, &[1.0], &opts).unwrap()[0].vbar.clone()
        };
        let reference = run(1e-4, true);
        let e1 = (&run(0.1, true) - &reference).l2();
        let e2 = (&run(0.05, true) - &reference).l2();
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
        let b1 = (&run(0.1, false) - &reference).l2();
        let b2 = (&run(0.05, false) - &reference).l2();
        assert!((b1 / b2 - 2.0).abs() < 0.3, "ratio {}", b1 / b2);
    }
}
