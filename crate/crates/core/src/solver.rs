//! Finite-volume integration of the damped system on the truncated half-line
//!
//! ```text
//!     v_t - u_x = 0,
//!     u_t + (p(v) - g(u) f(v))_x = -alpha u,
//!     u(0, t) = 0,   (v, u) -> (v_plus, u_plus e^{-alpha t}) at x = L.
//! ```
//!
//! Each step is Strang split: exact damping over `dt/2`, one second-order
//! central step for the conservative part, exact damping over `dt/2`.
//! The central step is the semi-discrete Kurganov-Tadmor scheme with a
//! generalized-minmod reconstruction, advanced with two-stage SSP Runge-Kutta.
//! An optional TVB bound `M dx^2` leaves small central slopes unlimited so
//! that smooth extrema keep second order.

use crate::closure::ModelSpec;
use crate::error::{Error, Result};
use crate::grid::{Field, HalfLineGrid, StateField, TAIL_TOLERANCE};

/// Limiter parameter of the generalized minmod (1 = classic minmod, 2 = MC).
pub const DEFAULT_THETA: f64 = 1.0;

pub const DEFAULT_CFL: f64 = 0.45;

/// Snapshots per decade of `t` used by [`geometric_times`] callers by default.
pub const DEFAULT_SNAPSHOTS_PER_DECADE: usize = 32;

/// Far-field state `(v_plus, u_plus e^{-alpha t})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarField {
    pub v_plus: f64,
    pub u_plus: f64,
}

impl FarField {
    pub fn velocity(&self, alpha: f64, t: f64) -> f64 {
        self.u_plus * (-alpha * t).exp()
    }
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub model: ModelSpec,
    pub grid: HalfLineGrid,
    pub v0: Field,
    pub u0: Field,
    pub v_plus: f64,
    pub u_plus: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub theta: f64,
    /// TVB constant `M`; zero gives the plain limiter.
    pub tvb: f64,
    pub snapshot_times: Vec<f64>,
}

impl Scenario {
    /// Builds and validates a scenario with the default limiter.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: ModelSpec,
        v0: Field,
        u0: Field,
        v_plus: f64,
        u_plus: f64,
        t_end: f64,
        cfl: f64,
        snapshot_times: Vec<f64>,
    ) -> Result<Self> {
        let scenario = Self {
            model,
            grid: *v0.grid(),
            v0,
            u0,
            v_plus,
            u_plus,
            t_end,
            cfl,
            theta: DEFAULT_THETA,
            tvb: 0.0,
            snapshot_times,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v0.grid() != &self.grid || self.u0.grid() != &self.grid {
            return Err(Error::Mismatch("initial fields live on different grids".into()));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Domain {
                what: "cfl",
                value: self.cfl,
                domain: "0 < cfl < 1",
            });
        }
        if !(self.theta >= 1.0 && self.theta <= 2.0) {
            return Err(Error::Domain {
                what: "theta",
                value: self.theta,
                domain: "1 <= theta <= 2",
            });
        }
        if !(self.tvb >= 0.0 && self.tvb.is_finite()) {
            return Err(Error::Domain {
                what: "tvb",
                value: self.tvb,
                domain: "finite and >= 0",
            });
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Domain {
                what: "t_end",
                value: self.t_end,
                domain: "finite and >= 0",
            });
        }
        if !(self.v_plus > 0.0) {
            return Err(Error::Vacuum {
                x: f64::INFINITY,
                v: self.v_plus,
            });
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) || self.snapshot_times.iter().any(|&t| t < 0.0) {
            return Err(Error::Mismatch("snapshot times must be nonnegative and increasing".into()));
        }
        StateField::new(self.v0.clone(), self.u0.clone())?;
        check_admissible(&self.model, &self.u0)?;
        let n = self.grid.cells();
        let tail_v = (self.v0.values()[n - 1] - self.v_plus).abs();
        let tail_u = (self.u0.values()[n - 1] - self.u_plus).abs();
        let tail = tail_v.max(tail_u);
        let tol = TAIL_TOLERANCE * (1.0 + self.v_plus.abs().max(self.u_plus.abs()));
        if tail > tol {
            return Err(Error::TailTolerance { tail, tol });
        }
        Ok(())
    }

    pub fn far_field(&self) -> FarField {
        FarField {
            v_plus: self.v_plus,
            u_plus: self.u_plus,
        }
    }

    pub fn initial_state(&self) -> StateField {
        StateField {
            v: self.v0.clone(),
            u: self.u0.clone(),
        }
    }
}

/// Domain length `10 sqrt(D t_end) + support` from the diffusive spreading rule.
pub fn auto_length(diffusivity: f64, t_end: f64, support: f64) -> f64 {
    10.0 * (diffusivity * t_end).sqrt() + support
}

/// `t_first 10^{k / per_decade}` up to `t_end`, with `t_end` appended.
pub fn geometric_times(t_first: f64, t_end: f64, per_decade: usize) -> Vec<f64> {
    let mut out = Vec::new();
    if !(t_first > 0.0) || t_end < t_first || per_decade == 0 {
        if t_end > 0.0 {
            out.push(t_end);
        }
        return out;
    }
    let ratio = 10f64.powf(1.0 / per_decade as f64);
    let mut k = 0;
    loop {
        let t = t_first * ratio.powi(k);
        if t >= t_end * (1.0 - 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.push(t_end);
    out
}

/// State at one requested time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub state: StateField,
}

/// Per-step record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    /// `int_0^L v` after the step.
    pub mass: f64,
    /// Largest characteristic speed at the start of the step.
    pub max_speed: f64,
    /// Cumulative mass that entered through `x = L`.
    pub inflow: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub scenario: Scenario,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<StepRecord>,
    pub initial_mass: f64,
}

impl Trajectory {
    /// Largest `|mass - initial - inflow| / initial` over the run.
    pub fn max_relative_mass_drift(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|r| (r.mass - self.initial_mass - r.inflow).abs() / self.initial_mass.abs())
            .fold(0.0, f64::max)
    }

    pub fn steps(&self) -> usize {
        self.diagnostics.len()
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.t - t).abs() <= 1e-9 * t.max(1.0))
    }
}

fn check_admissible(model: &ModelSpec, u: &Field) -> Result<()> {
    let (lo, hi) = model.admissible_u;
    for (j, &uj) in u.values().iter().enumerate() {
        if !(uj >= lo && uj <= hi) {
            return Err(Error::Admissibility {
                x: u.grid().x(j),
                u: uj,
                lo,
                hi,
            });
        }
    }
    Ok(())
}

/// Largest spectral radius of the flux Jacobian over all cells.
pub fn max_wave_speed(state: &StateField, model: &ModelSpec) -> Result<f64> {
    let mut speed = 0.0f64;
    for (j, (&v, &u)) in state.v.values().iter().zip(state.u.values()).enumerate() {
        if !(v > 0.0) {
            return Err(Error::Vacuum {
                x: state.v.grid().x(j),
                v,
            });
        }
        speed = speed.max(model.spectral_radius(v, u));
    }
    Ok(speed)
}

#[inline]
fn minmod3(a: f64, b: f64, c: f64) -> f64 {
    if a > 0.0 && b > 0.0 && c > 0.0 {
        a.min(b).min(c)
    } else if a < 0.0 && b < 0.0 && c < 0.0 {
        a.max(b).max(c)
    } else {
        0.0
    }
}

/// Reusable work buffers for the central scheme.
pub struct Integrator<'a> {
    model: &'a ModelSpec,
    far: FarField,
    dx: f64,
    cfl: f64,
    theta: f64,
    /// `M dx^2`.
    tvb_bound: f64,
    ve: Vec<f64>,
    ue: Vec<f64>,
    sv: Vec<f64>,
    su: Vec<f64>,
    hv: Vec<f64>,
    hu: Vec<f64>,
    dv: Vec<f64>,
    du: Vec<f64>,
    v1: Vec<f64>,
    u1: Vec<f64>,
}

impl<'a> Integrator<'a> {
    pub fn new(model: &'a ModelSpec, grid: &HalfLineGrid, far: FarField, cfl: f64, theta: f64) -> Self {
        let n = grid.cells();
        Self {
            model,
            far,
            dx: grid.dx(),
            cfl,
            theta,
            tvb_bound: 0.0,
            ve: vec![0.0; n + 4],
            ue: vec![0.0; n + 4],
            sv: vec![0.0; n + 4],
            su: vec![0.0; n + 4],
            hv: vec![0.0; n + 1],
            hu: vec![0.0; n + 1],
            dv: vec![0.0; n],
            du: vec![0.0; n],
            v1: vec![0.0; n],
            u1: vec![0.0; n],
        }
    }

    /// Time step allowed by the Courant number for this state.
    /// Enables the TVB bound with constant `m`.
    pub fn with_tvb(mut self, m: f64) -> Self {
        self.tvb_bound = m * self.dx * self.dx;
        self
    }

    pub fn stable_dt(&self, v: &[f64], u: &[f64]) -> Result<(f64, f64)> {
        let mut speed = 0.0f64;
        for (j, (&vj, &uj)) in v.iter().zip(u).enumerate() {
            if !(vj > 0.0) {
                return Err(Error::Vacuum {
                    x: (j as f64 + 0.5) * self.dx,
                    v: vj,
                });
            }
            speed = speed.max(self.model.spectral_radius(vj, uj));
        }
        let dt = if speed > 0.0 { self.cfl * self.dx / speed } else { f64::INFINITY };
        Ok((dt, speed))
    }

    /// Semi-discrete right-hand side; writes `dv`, `du` and returns the
    /// mass flux through the far face.
    fn rhs(&mut self, v: &[f64], u: &[f64], u_ghost: f64) -> Result<f64> {
        let n = v.len();
        let model = self.model;
        // ghosts: v even / u odd at the wall, far-field state at L
        self.ve[0] = v[1];
        self.ve[1] = v[0];
        self.ue[0] = -u[1];
        self.ue[1] = -u[0];
        self.ve[2..n + 2].copy_from_slice(v);
        self.ue[2..n + 2].copy_from_slice(u);
        for k in n + 2..n + 4 {
            self.ve[k] = self.far.v_plus;
            self.ue[k] = u_ghost;
        }
        let (th, bound) = (self.theta, self.tvb_bound);
        let slope = |a: f64, b: f64, c: f64| {
            let central = 0.5 * (c - a);
            if central.abs() <= bound {
                central
            } else {
                minmod3(th * (b - a), central, th * (c - b))
            }
        };
        for k in 1..n + 3 {
            self.sv[k] = slope(self.ve[k - 1], self.ve[k], self.ve[k + 1]);
            self.su[k] = slope(self.ue[k - 1], self.ue[k], self.ue[k + 1]);
        }
        // interface i sits between extended cells i + 1 and i + 2
        for i in 0..=n {
            let (l, r) = (i + 1, i + 2);
            let vl = self.ve[l] + 0.5 * self.sv[l];
            let ul = self.ue[l] + 0.5 * self.su[l];
            let vr = self.ve[r] - 0.5 * self.sv[r];
            let ur = self.ue[r] - 0.5 * self.su[r];
            if !(vl > 0.0 && vr > 0.0) {
                return Err(Error::Vacuum {
                    x: i as f64 * self.dx,
                    v: vl.min(vr),
                });
            }
            let a = model.spectral_radius(vl, ul).max(model.spectral_radius(vr, ur));
            let fl = model.momentum_flux(vl, ul);
            let fr = model.momentum_flux(vr, ur);
            self.hv[i] = -0.5 * (ul + ur) - 0.5 * a * (vr - vl);
            self.hu[i] = 0.5 * (fl + fr) - 0.5 * a * (ur - ul);
        }
        let inv_dx = 1.0 / self.dx;
        for j in 0..n {
            self.dv[j] = -(self.hv[j + 1] - self.hv[j]) * inv_dx;
            self.du[j] = -(self.hu[j + 1] - self.hu[j]) * inv_dx;
        }
        Ok(self.hv[n])
    }

    /// Advances `(v, u)` in place from `t` to `t + dt`; returns the mass that
    /// entered through the far face.
    pub fn advance(&mut self, v: &mut [f64], u: &mut [f64], t: f64, dt: f64) -> Result<f64> {
        let (limit, _) = self.stable_dt(v, u)?;
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, limit });
        }
        let alpha = self.model.alpha;
        let half = (-0.5 * alpha * dt).exp();
        for uj in u.iter_mut() {
            *uj *= half;
        }
        let u_ghost = self.far.velocity(alpha, t + 0.5 * dt);

        let flux0 = self.rhs(v, u, u_ghost)?;
        for j in 0..v.len() {
            self.v1[j] = v[j] + dt * self.dv[j];
            self.u1[j] = u[j] + dt * self.du[j];
        }
        let (v1, u1) = (std::mem::take(&mut self.v1), std::mem::take(&mut self.u1));
        let flux1 = self.rhs(&v1, &u1, u_ghost);
        let flux1 = match flux1 {
            Ok(f) => f,
            Err(e) => {
                self.v1 = v1;
                self.u1 = u1;
                return Err(e);
            }
        };
        for j in 0..v.len() {
            v[j] = 0.5 * v[j] + 0.5 * (v1[j] + dt * self.dv[j]);
            u[j] = 0.5 * u[j] + 0.5 * (u1[j] + dt * self.du[j]);
        }
        self.v1 = v1;
        self.u1 = u1;

        for uj in u.iter_mut() {
            *uj *= half;
        }
        for (j, &vj) in v.iter().enumerate() {
            if !(vj > 0.0) {
                return Err(Error::Vacuum {
                    x: (j as f64 + 0.5) * self.dx,
                    v: vj,
                });
            }
        }
        let (lo, hi) = self.model.admissible_u;
        for (j, &uj) in u.iter().enumerate() {
            if !(uj >= lo && uj <= hi) {
                return Err(Error::Admissibility {
                    x: (j as f64 + 0.5) * self.dx,
                    u: uj,
                    lo,
                    hi,
                });
            }
        }
        // mass flux leaving through L is hv[n]; inflow is its negative
        Ok(-0.5 * dt * (flux0 + flux1))
    }
}

/// One split step of size `dt` starting at time `t`.
///
/// Fails with [`Error::Cfl`] when `dt` exceeds `cfl dx / max_wave_speed`.
pub fn step(state: &StateField, dt: f64, t: f64, model: &ModelSpec, far: FarField, cfl: f64) -> Result<StateField> {
    let grid = *state.grid();
    let mut integrator = Integrator::new(model, &grid, far, cfl, DEFAULT_THETA);
    let mut v = state.v.values().to_vec();
    let mut u = state.u.values().to_vec();
    integrator.advance(&mut v, &mut u, t, dt)?;
    Ok(StateField {
        v: Field::from_values_unchecked(grid, v),
        u: Field::from_values_unchecked(grid, u),
    })
}

/// Integrates to `t_end`, storing the initial state, every requested time
/// in `(0, t_end]`, and `t_end` itself.
pub fn run(scenario: &Scenario) -> Result<Trajectory> {
    scenario.validate()?;
    let grid = scenario.grid;
    let dx = grid.dx();
    let mut integrator =
        Integrator::new(&scenario.model, &grid, scenario.far_field(), scenario.cfl, scenario.theta).with_tvb(scenario.tvb);
    let mut v = scenario.v0.values().to_vec();
    let mut u = scenario.u0.values().to_vec();
    let mass = |v: &[f64]| v.iter().sum::<f64>() * dx;
    let initial_mass = mass(&v);

    let mut targets: Vec<f64> = scenario
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < scenario.t_end)
        .collect();
    if scenario.t_end > 0.0 {
        targets.push(scenario.t_end);
    }

    let mut snapshots = vec![Snapshot {
        t: 0.0,
        state: scenario.initial_state(),
    }];
    let mut diagnostics = Vec::new();
    let mut t = 0.0;
    let mut inflow = 0.0;
    for &target in &targets {
        while t < target {
            let (dt_stable, speed) = integrator.stable_dt(&v, &u).map_err(|e| e.at_time(t))?;
            let mut dt = dt_stable.min(target - t);
            let landing = t + dt >= target || target - (t + dt) < 1e-9 * target;
            if landing {
                dt = target - t;
            }
            if dt > dt_stable {
                // snapping onto the target may not push past the CFL bound
                dt = dt_stable;
            }
            inflow += integrator.advance(&mut v, &mut u, t, dt).map_err(|e| e.at_time(t))?;
            t = if landing && dt == target - t { target } else { t + dt };
            diagnostics.push(StepRecord {
                t,
                dt,
                mass: mass(&v),
                max_speed: speed,
                inflow,
            });
        }
        snapshots.push(Snapshot {
            t: target,
            state: StateField {
                v: Field::from_values_unchecked(grid, v.clone()),
                u: Field::from_values_unchecked(grid, u.clone()),
            },
        });
    }
    Ok(Trajectory {
        scenario: scenario.clone(),
        snapshots,
        diagnostics,
        initial_mass,
    })
}
