//! Perturbation variables around the asymptotic ansatz:
//!
//! ```text
//!     V(x, t) = -int_x^inf (v - vbar - vhat)(y, t) dy,     z = u - ubar - uhat,
//! ```
//!
//! which satisfy `V_t = z` and
//!
//! ```text
//!     z_t + (p'(vbar) V_x)_x + alpha z = F1 + F2,
//!     F1 = (1/alpha) p(vbar)_xt - (p(V_x + vbar + vhat) - p(vbar) - p'(vbar) V_x)_x,
//!     F2 = (g(V_t + ubar + uhat) f(V_x + vbar + vhat))_x.
//! ```
//!
//! Time derivatives come from differencing neighbouring snapshots with
//! three-point stencils on the (nonuniform) snapshot times.

use std::collections::BTreeMap;

use crate::closure::ModelSpec;
use crate::decay::{Quantity, Subject};
use crate::error::{Error, Result};
use crate::grid::{Boundary, End, Field, StateField, TAIL_TOLERANCE};
use crate::profiles::ProfileBundle;

/// `V` is odd at the wall, so `V_x` is even and `V_xx` odd.
const EVEN_WALL: Boundary = Boundary {
    left: End::Even,
    right: End::OneSided,
};
const ODD_WALL: Boundary = Boundary {
    left: End::Odd,
    right: End::OneSided,
};

/// Snapshot-differenced time derivatives.
#[derive(Debug, Clone)]
pub struct TimeDerivatives {
    pub v_t: Field,
    pub v_tt: Field,
    pub z_t: Field,
    pub z_xt: Field,
    pub z_tt: Field,
}

/// `V`, `z`, their spatial derivatives and the forcing terms at one time.
#[derive(Debug, Clone)]
pub struct PerturbationSnapshot {
    pub t: f64,
    pub alpha: f64,
    pub v_plus: f64,
    pub big_v: Field,
    /// `v - vbar - vhat`, the exact derivative of `V`.
    pub big_v_x: Field,
    pub big_v_xx: Field,
    pub big_v_xxx: Field,
    pub z: Field,
    pub z_x: Field,
    pub z_xx: Field,
    pub f1: Field,
    pub f2: Field,
    /// Filled by [`attach_time_derivatives`].
    pub time: Option<TimeDerivatives>,
}

impl PerturbationSnapshot {
    pub fn time_derivatives(&self) -> Result<&TimeDerivatives> {
        self.time.as_ref().ok_or(Error::InsufficientSamples { need: 3, got: 1 })
    }

    /// `d_x^k V` for `k <= 3`.
    pub fn v_derivative(&self, k: usize) -> Result<&Field> {
        Ok(match k {
            0 => &self.big_v,
            1 => &self.big_v_x,
            2 => &self.big_v_xx,
            3 => &self.big_v_xxx,
            _ => return Err(Error::DerivativeOrder { k, j: 0 }),
        })
    }

    /// `d_x^k d_t^j z` for `k + j <= 2`.
    pub fn z_derivative(&self, k: usize, j: usize) -> Result<&Field> {
        Ok(match (k, j) {
            (0, 0) => &self.z,
            (1, 0) => &self.z_x,
            (2, 0) => &self.z_xx,
            (0, 1) => &self.time_derivatives()?.z_t,
            (1, 1) => &self.time_derivatives()?.z_xt,
            (0, 2) => &self.time_derivatives()?.z_tt,
            _ => return Err(Error::DerivativeOrder { k, j }),
        })
    }
}

fn check_same(state: &StateField, profiles: &ProfileBundle, t: f64) -> Result<()> {
    if state.grid() != profiles.grid() {
        return Err(Error::Mismatch("state and profiles live on different grids".into()));
    }
    if (profiles.t - t).abs() > 1e-9 * t.abs().max(1.0) {
        return Err(Error::Mismatch(format!(
            "state at t = {t} paired with profiles at t = {}",
            profiles.t
        )));
    }
    Ok(())
}

/// `v - vbar - vhat`.
fn volume_excess(state: &StateField, profiles: &ProfileBundle) -> Field {
    let w = &state.v - &profiles.vbar;
    &w - &profiles.vhat
}

/// Builds `V`, `z`, their derivatives and `F1`, `F2` from a state and the
/// matching profiles.
pub fn build_perturbation(
    t: f64,
    state: &StateField,
    profiles: &ProfileBundle,
    model: &ModelSpec,
) -> Result<PerturbationSnapshot> {
    check_same(state, profiles, t)?;
    let big_v_x = volume_excess(state, profiles);
    let big_v = big_v_x.tail_integrals().scale(-1.0);
    let n = big_v.len();
    let tail = big_v.values()[n - 1].abs();
    let tol = TAIL_TOLERANCE * big_v.linf().max(1e-6);
    if tail > tol {
        return Err(Error::TailTolerance { tail, tol });
    }
    let big_v_xx = big_v_x.ddx(EVEN_WALL);
    let big_v_xxx = big_v_xx.ddx(ODD_WALL);
    let z = &(&state.u - &profiles.ubar) - &profiles.uhat;
    let z_x = z.ddx(ODD_WALL);
    let z_xx = z_x.ddx(EVEN_WALL);
    let f1 = eval_f1(&big_v_x, profiles, model)?;
    let f2 = eval_f2(&big_v_x, &z, profiles, model);
    Ok(PerturbationSnapshot {
        t,
        alpha: model.alpha,
        v_plus: profiles.v_plus,
        big_v,
        big_v_x,
        big_v_xx,
        big_v_xxx,
        z,
        z_x,
        z_xx,
        f1,
        f2,
        time: None,
    })
}

/// `int (v - vbar - vhat)`; vanishes at `t = 0` when `delta0` is matched.
pub fn zero_mass_check(state: &StateField, profiles: &ProfileBundle) -> f64 {
    volume_excess(state, profiles).integrate()
}

/// `F1` from `V_x` and the profiles; `(1/alpha) p(vbar)_xt` equals `-ubar_t`.
pub fn eval_f1(big_v_x: &Field, profiles: &ProfileBundle, model: &ModelSpec) -> Result<Field> {
    let grid = *big_v_x.grid();
    let mut remainder = Vec::with_capacity(grid.cells());
    for j in 0..grid.cells() {
        let vx = big_v_x.values()[j];
        let vb = profiles.vbar.values()[j];
        let v = vx + vb + profiles.vhat.values()[j];
        if !(v > 0.0) {
            return Err(Error::Vacuum { x: grid.x(j), v });
        }
        remainder.push(model.p(v) - model.p(vb) - model.p_deriv(vb) * vx);
    }
    let remainder_x = Field::from_values_unchecked(grid, remainder).ddx(EVEN_WALL);
    Ok(&profiles.ubar_t.scale(-1.0) - &remainder_x)
}

/// Direct form `F2 = (g(u) f(v))_x`, with `V_t + ubar + uhat = z + ubar + uhat = u`.
pub fn eval_f2(big_v_x: &Field, z: &Field, profiles: &ProfileBundle, model: &ModelSpec) -> Field {
    if !model.has_flux_term() {
        return big_v_x.grid().zeros();
    }
    let u = &(z + &profiles.ubar) + &profiles.uhat;
    let v = &(big_v_x + &profiles.vbar) + &profiles.vhat;
    u.zip_map(&v, |u, v| model.g(u) * model.f(v)).ddx(EVEN_WALL)
}

/// Expanded form
/// `g'(u) f(v) (V_xt + ubar_x + vhat_t) + g(u) f'(v) (V_xx + vbar_x + vhat_x)`,
/// with `V_xt = z_x`, `ubar_x = -(1/alpha) p(vbar)_xx` and `uhat_x = vhat_t`.
pub fn eval_f2_expanded(snapshot: &PerturbationSnapshot, profiles: &ProfileBundle, model: &ModelSpec) -> Field {
    let grid = *snapshot.z.grid();
    if !model.has_flux_term() {
        return grid.zeros();
    }
    let ubar_x = profiles.ubar.ddx(ODD_WALL);
    let vhat_t = profiles.vhat_t();
    let vhat_x = profiles.vhat.ddx(Boundary::ONE_SIDED);
    let n = grid.cells();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let u = snapshot.z.values()[j] + profiles.ubar.values()[j] + profiles.uhat.values()[j];
        let v = snapshot.big_v_x.values()[j] + profiles.vbar.values()[j] + profiles.vhat.values()[j];
        let u_x = snapshot.z_x.values()[j] + ubar_x.values()[j] + vhat_t.values()[j];
        let v_x = snapshot.big_v_xx.values()[j] + profiles.vbar_x.values()[j] + vhat_x.values()[j];
        out.push(model.g_deriv(u) * model.f(v) * u_x + model.g(u) * model.f_deriv(v) * v_x);
    }
    Field::from_values_unchecked(grid, out)
}

/// `z_t + (p'(vbar) V_x)_x + alpha z - F1 - F2`.
pub fn reformulation_residual(snapshot: &PerturbationSnapshot, profiles: &ProfileBundle, model: &ModelSpec) -> Result<Field> {
    let td = snapshot.time_derivatives()?;
    let flux = profiles
        .vbar
        .zip_map(&snapshot.big_v_x, |vb, vx| model.p_deriv(vb) * vx)
        .ddx(EVEN_WALL);
    let lhs = &(&td.z_t + &flux) + &snapshot.z.scale(model.alpha);
    Ok(&(&lhs - &snapshot.f1) - &snapshot.f2)
}

/// `V_t - z`.
pub fn time_consistency_residual(snapshot: &PerturbationSnapshot) -> Result<Field> {
    Ok(&snapshot.time_derivatives()?.v_t - &snapshot.z)
}

/// Both sides of `||f||_inf <= sqrt(2) ||f||^{1/2} ||f_x||^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevSides {
    pub sup: f64,
    pub bound: f64,
}

impl SobolevSides {
    pub fn holds(&self) -> bool {
        self.sup <= self.bound
    }
}

pub fn sobolev_sides(f: &Field) -> SobolevSides {
    let fx = f.ddx(Boundary::ONE_SIDED);
    SobolevSides {
        sup: f.linf(),
        bound: std::f64::consts::SQRT_2 * (f.l2() * fx.l2()).sqrt(),
    }
}

pub fn sobolev_inequality_check(f: &Field) -> bool {
    sobolev_sides(f).holds()
}

/// Weights of the first and second derivative at `ts[at]` of the quadratic
/// through three points.
pub(crate) fn three_point_weights(ts: [f64; 3], at: usize) -> ([f64; 3], [f64; 3]) {
    let t = ts[at];
    let mut first = [0.0; 3];
    let mut second = [0.0; 3];
    for i in 0..3 {
        let (a, b) = ((i + 1) % 3, (i + 2) % 3);
        let denom = (ts[i] - ts[a]) * (ts[i] - ts[b]);
        first[i] = ((t - ts[a]) + (t - ts[b])) / denom;
        second[i] = 2.0 / denom;
    }
    (first, second)
}

fn combine(fields: [&Field; 3], w: [f64; 3]) -> Field {
    let grid = *fields[0].grid();
    let values = (0..grid.cells())
        .map(|j| w[0] * fields[0].values()[j] + w[1] * fields[1].values()[j] + w[2] * fields[2].values()[j])
        .collect();
    Field::from_values_unchecked(grid, values)
}

/// Fills `time` on every snapshot; centred stencils inside, one-sided at the ends.
pub fn attach_time_derivatives(snapshots: &mut [PerturbationSnapshot]) -> Result<()> {
    let n = snapshots.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { need: 3, got: n });
    }
    if snapshots.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(Error::Mismatch("snapshot times must increase".into()));
    }
    let mut computed = Vec::with_capacity(n);
    for i in 0..n {
        let start = i.saturating_sub(1).min(n - 3);
        let s = [&snapshots[start], &snapshots[start + 1], &snapshots[start + 2]];
        let (d1, d2) = three_point_weights([s[0].t, s[1].t, s[2].t], i - start);
        let vs = [&s[0].big_v, &s[1].big_v, &s[2].big_v];
        let zs = [&s[0].z, &s[1].z, &s[2].z];
        let zxs = [&s[0].z_x, &s[1].z_x, &s[2].z_x];
        computed.push(TimeDerivatives {
            v_t: combine(vs, d1),
            v_tt: combine(vs, d2),
            z_t: combine(zs, d1),
            z_xt: combine(zxs, d1),
            z_tt: combine(zs, d2),
        });
    }
    for (snap, td) in snapshots.iter_mut().zip(computed) {
        snap.time = Some(td);
    }
    Ok(())
}

/// Norm histories of `V`, `z` and the weighted monitor `N(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSeries {
    pub times: Vec<f64>,
    pub series: BTreeMap<Quantity, Vec<(f64, f64)>>,
    /// Running supremum of the weighted energy.
    pub monitor: Vec<(f64, f64)>,
}

/// Velocity orders tracked in every series.
pub const Z_ORDERS: [(usize, usize); 6] = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (0, 2)];

pub const MONITOR_NAME: &str = "N(t)";

impl NormSeries {
    /// Flat `(t, name, value)` rows.
    pub fn rows(&self) -> Vec<(f64, String, f64)> {
        let mut rows = Vec::new();
        for (i, &t) in self.times.iter().enumerate() {
            for (q, s) in &self.series {
                rows.push((t, q.name(), s[i].1));
            }
            rows.push((t, MONITOR_NAME.to_string(), self.monitor[i].1));
        }
        rows
    }

    pub fn get(&self, q: &Quantity) -> Option<&[(f64, f64)]> {
        self.series.get(q).map(|s| s.as_slice())
    }
}

/// L2 norms of `d_x^k V` (`k <= 3`), `d_x^k d_t^j z` (`k + j <= 2`) and `N(t)`.
pub fn norm_series(snapshots: &[PerturbationSnapshot]) -> Result<NormSeries> {
    if snapshots.len() < 3 {
        return Err(Error::InsufficientSamples {
            need: 3,
            got: snapshots.len(),
        });
    }
    let mut series: BTreeMap<Quantity, Vec<(f64, f64)>> = BTreeMap::new();
    let mut monitor = Vec::with_capacity(snapshots.len());
    let mut running = 0.0f64;
    for s in snapshots {
        let t = s.t;
        let w = 1.0 + t;
        let mut energy = 0.0;
        for k in 0..=3 {
            let n = s.v_derivative(k)?.l2();
            energy += w.powi(k as i32) * n * n;
            series.entry(Quantity::l2(Subject::V, k, 0)).or_default().push((t, n));
        }
        for (k, j) in Z_ORDERS {
            let n = s.z_derivative(k, j)?.l2();
            match j {
                0 => energy += w.powi(k as i32 + 2) * n * n,
                1 => energy += w.powi(k as i32 + 4) * n * n,
                _ => {}
            }
            series.entry(Quantity::l2(Subject::Z, k, j)).or_default().push((t, n));
        }
        running = running.max(energy);
        monitor.push((t, running));
    }
    Ok(NormSeries {
        times: snapshots.iter().map(|s| s.t).collect(),
        series,
        monitor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::HalfLineGrid;
    use crate::profiles::{
        bump_m0, compute_delta0, default_phi0, solve_diffusion_wave, Correction, DiffusionWaveSetup, ProfileSolverOptions,
    };
    use proptest::prelude::*;

    fn m1() -> ModelSpec {
        ModelSpec::m1(1.0).unwrap()
    }

    fn profiles_with_correction(grid: HalfLineGrid, t: f64) -> ProfileBundle {
        let model = m1();
        let setup = DiffusionWaveSetup::new(1.0, 0.02, default_phi0(&grid), model).unwrap();
        let corr = Correction::new(0.05, 1.0, bump_m0(&grid, 2.0).unwrap());
        solve_diffusion_wave(&setup, Some(&corr), &[t], &ProfileSolverOptions::default())
            .unwrap()
            .pop()
            .unwrap()
    }

    #[test]
    fn ansatz_state_gives_zero_perturbation() {
        let grid = HalfLineGrid::new(40.0, 400).unwrap();
        let b = profiles_with_correction(grid, 1.0);
        let state = StateField::new(&b.vbar + &b.vhat, &b.ubar + &b.uhat).unwrap();
        let p = build_perturbation(1.0, &state, &b, &m1()).unwrap();
        assert!(p.big_v.linf() < 1e-15 && p.z.linf() < 1e-15);
    }

    #[test]
    fn tail_quadrature_of_an_indicator() {
        let grid = HalfLineGrid::new(10.0, 100).unwrap();
        let b = ProfileBundle::flat(grid, 0.0, 1.0, 1.0);
        // mass 0.3 on [2, 5]
        let v = grid.sample(|x| if (2.0..5.0).contains(&x) { 1.1 } else { 1.0 });
        let state = StateField::new(v, grid.zeros()).unwrap();
        let p = build_perturbation(0.0, &state, &b, &m1()).unwrap();
        for (j, &vv) in p.big_v.values().iter().enumerate() {
            let x = grid.x(j);
            if x < 2.0 {
                assert!((vv + 0.3).abs() < 1e-12, "{x} {vv}");
            } else if x > 5.0 {
                assert!(vv.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn z_vanishes_at_the_wall() {
        let grid = HalfLineGrid::new(40.0, 800).unwrap();
        let b = profiles_with_correction(grid, 2.0);
        let u = &(&b.ubar + &b.uhat) + &grid.sample(|x| 0.01 * (x / 3.0).sin() * (-x * x / 20.0).exp());
        let state = StateField::new(&b.vbar + &b.vhat, u).unwrap();
        let p = build_perturbation(2.0, &state, &b, &m1()).unwrap();
        assert!(p.z.value_at_wall().abs() < 1e-7, "{}", p.z.value_at_wall());
    }

    #[test]
    fn truncated_tail_is_rejected() {
        let grid = HalfLineGrid::new(10.0, 100).unwrap();
        let b = ProfileBundle::flat(grid, 0.0, 1.0, 1.0);
        let state = StateField::new(grid.sample(|x| 1.0 + 0.1 * (-(x - 9.0).powi(2)).exp()), grid.zeros()).unwrap();
        assert!(matches!(build_perturbation(0.0, &state, &b, &m1()), Err(Error::TailTolerance { .. })));
    }

    #[test]
    fn zero_mass_identity_with_matched_and_mis_set_delta0() {
        let grid = HalfLineGrid::new(60.0, 600).unwrap();
        let (u_plus, alpha) = (0.05, 1.0);
        let phi0 = default_phi0(&grid);
        let m0 = bump_m0(&grid, 2.0).unwrap();
        let v0 = grid.sample(|x| 1.0 + 0.03 * (-(x - 10.0).powi(2) / 3.0).exp());
        let u0 = grid.sample(|x| u_plus * (1.0 - (-x * x).exp()));
        let delta0 = compute_delta0(&v0, 1.0, &phi0, u_plus, alpha).unwrap();
        let corr = Correction::new(u_plus, alpha, m0);
        let bundle = |d: f64| {
            let setup = DiffusionWaveSetup::new(1.0, d, phi0.clone(), m1()).unwrap();
            solve_diffusion_wave(&setup, Some(&corr), &[0.0], &ProfileSolverOptions::default())
                .unwrap()
                .pop()
                .unwrap()
        };
        let state = StateField::new(v0, u0).unwrap();
        assert!(zero_mass_check(&state, &bundle(delta0)).abs() <= 1e-10);
        let eps = 1e-3;
        let off = zero_mass_check(&state, &bundle(delta0 + eps));
        assert!((off + eps * phi0.integrate()).abs() < 1e-12, "{off}");
    }

    #[test]
    fn f1_reduces_to_profile_term() {
        let grid = HalfLineGrid::new(40.0, 400).unwrap();
        let setup = DiffusionWaveSetup::new(1.0, 0.1, default_phi0(&grid), m1()).unwrap();
        let b = solve_diffusion_wave(&setup, None, &[3.0], &ProfileSolverOptions::default())
            .unwrap()
            .pop()
            .unwrap();
        let f1 = eval_f1(&grid.zeros(), &b, &m1()).unwrap();
        assert!((&f1 + &b.ubar_t).linf() == 0.0);
        let flat = ProfileBundle::flat(grid, 0.0, 1.0, 1.0);
        assert_eq!(eval_f1(&grid.zeros(), &flat, &m1()).unwrap().linf(), 0.0);
    }

    #[test]
    fn f1_matches_taylor_remainder() {
        // p(v) = 1/(3v): p'' = 2/(3 v^3)
        let grid = HalfLineGrid::new(20.0, 2000).unwrap();
        let flat = ProfileBundle::flat(grid, 0.0, 1.0, 1.0);
        let shape = |x: f64| (-(x - 8.0).powi(2)).exp();
        let dshape = |x: f64| -2.0 * (x - 8.0) * shape(x);
        let err = |eps: f64| {
            let vx = grid.sample(|x| eps * shape(x));
            let f1 = eval_f1(&vx, &flat, &m1()).unwrap();
            // -(p''/2 (eps s)^2)_x = -(2/3) eps^2 s s'
            let oracle = grid.sample(|x| -(2.0 / 3.0) * eps * eps * shape(x) * dshape(x));
            (&f1 - &oracle).linf() / oracle.linf()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 < 0.05, "{e1}");
        assert!(e2 < 0.6 * e1, "{e1} {e2}");
    }

    #[test]
    fn f2_vanishes_without_flux_or_velocity() {
        let grid = HalfLineGrid::new(40.0, 400).unwrap();
        let gamma = ModelSpec::gamma_law(1.4, 1.0).unwrap();
        let b = profiles_with_correction(grid, 1.0);
        let vx = grid.sample(|x| 0.01 * (-(x - 5.0).powi(2)).exp());
        let z = grid.sample(|x| 0.01 * (-(x - 6.0).powi(2)).exp());
        assert_eq!(eval_f2(&vx, &z, &b, &gamma).linf(), 0.0);
        // u = z + ubar + uhat = 0
        // g is quadratic at 0, so rounding in u leaves only ~1e-39
        let z = (&b.ubar + &b.uhat).scale(-1.0);
        assert!(eval_f2(&vx, &z, &b, &m1()).linf() < 1e-30);
    }

    fn smooth_state(grid: HalfLineGrid, b: &ProfileBundle) -> StateField {
        let v = &(&b.vbar + &b.vhat) + &grid.sample(|x| 0.02 * (x - 4.0) * (-(x - 4.0).powi(2) / 2.0).exp());
        let u = &(&b.ubar + &b.uhat) + &grid.sample(|x| 0.3 * x * (-(x - 3.0).powi(2) / 4.0).exp());
        StateField::new(v, u).unwrap()
    }

    #[test]
    fn f2_direct_and_expanded_forms_agree_to_second_order() {
        let gap = |cells: usize| {
            let grid = HalfLineGrid::new(30.0, cells).unwrap();
            let b = profiles_with_correction(grid, 0.5);
            let p = build_perturbation(0.5, &smooth_state(grid, &b), &b, &m1()).unwrap();
            (&p.f2 - &eval_f2_expanded(&p, &b, &m1())).l2()
        };
        let (e1, e2) = (gap(600), gap(1200));
        assert!(e1 < 1e-3, "{e1}");
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn tail_integral_derivative_is_the_volume_excess() {
        let gap = |cells: usize| {
            let grid = HalfLineGrid::new(30.0, cells).unwrap();
            let b = profiles_with_correction(grid, 0.5);
            let p = build_perturbation(0.5, &smooth_state(grid, &b), &b, &m1()).unwrap();
            (&p.big_v.ddx(Boundary::ONE_SIDED) - &p.big_v_x).l2()
        };
        let (e1, e2) = (gap(300), gap(600));
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn three_point_weights_are_exact_on_quadratics() {
        let ts = [1.0, 1.3, 2.1];
        let f = |t: f64| 2.0 - 3.0 * t + 0.7 * t * t;
        for at in 0..3 {
            let (d1, d2) = three_point_weights(ts, at);
            let g1: f64 = (0..3).map(|i| d1[i] * f(ts[i])).sum();
            let g2: f64 = (0..3).map(|i| d2[i] * f(ts[i])).sum();
            assert!((g1 - (-3.0 + 1.4 * ts[at])).abs() < 1e-12);
            assert!((g2 - 1.4).abs() < 1e-12);
        }
    }

    /// Snapshots of a manufactured pair `V = a(t) psi(x)`, `z = a'(t) psi(x)`
    /// around flat profiles.
    fn manufactured(cells: usize, dt: f64, model: &ModelSpec) -> (Vec<PerturbationSnapshot>, ProfileBundle) {
        let grid = HalfLineGrid::new(12.0, cells).unwrap();
        let flat = ProfileBundle::flat(grid, 0.0, 1.0, model.alpha);
        let psi_x = |x: f64| (1.0 - 2.0 * x * x) * (-x * x).exp(); // psi = x e^{-x^2}
        let psi = |x: f64| x * (-x * x).exp();
        let a = |t: f64| 0.05 * (-0.5 * t).exp() * (1.0 + 0.3 * t.sin());
        let da = |t: f64| 0.05 * (-0.5 * t).exp() * (-0.5 * (1.0 + 0.3 * t.sin()) + 0.3 * t.cos());
        let snaps = (0..5)
            .map(|i| {
                let t = 1.0 + (i as f64 - 2.0) * dt;
                let v = grid.sample(|x| 1.0 + a(t) * psi_x(x));
                let u = grid.sample(|x| da(t) * psi(x));
                let mut b = flat.clone();
                b.t = t;
                build_perturbation(t, &StateField::new(v, u).unwrap(), &b, model).unwrap()
            })
            .collect::<Vec<_>>();
        (snaps, flat)
    }

    #[test]
    fn manufactured_residual_recovers_the_source() {
        let model = m1();
        let grid_err = |cells: usize, dt: f64| {
            let (mut snaps, mut flat) = manufactured(cells, dt, &model);
            attach_time_derivatives(&mut snaps).unwrap();
            flat.t = snaps[2].t;
            let res = reformulation_residual(&snaps[2], &flat, &model).unwrap();
            // analytic source at t = 1
            let t = 1.0f64;
            let e = (-0.5 * t).exp();
            let a = 0.05 * e * (1.0 + 0.3 * t.sin());
            let da = 0.05 * e * (-0.5 * (1.0 + 0.3 * t.sin()) + 0.3 * t.cos());
            let dda = 0.05 * e * (0.25 * (1.0 + 0.3 * t.sin()) - 0.3 * t.cos() - 0.3 * t.sin());
            let grid = *res.grid();
            let source = grid.sample(|x| {
                let ex = (-x * x).exp();
                let psi = x * ex;
                let psi_x = (1.0 - 2.0 * x * x) * ex;
                let psi_xx = (4.0 * x * x * x - 6.0 * x) * ex;
                let v = 1.0 + a * psi_x;
                let u = da * psi;
                let z_t = dda * psi;
                let lin = model.p_deriv(1.0) * a * psi_xx;
                let f1 = -(model.p_deriv(v) - model.p_deriv(1.0)) * a * psi_xx;
                let f2 = model.g_deriv(u) * da * psi_x * model.f(v) + model.g(u) * model.f_deriv(v) * a * psi_xx;
                z_t + lin + model.alpha * u - f1 - f2
            });
            (&res - &source).l2()
        };
        let e1 = grid_err(300, 0.02);
        let e2 = grid_err(600, 0.01);
        assert!(e1 < 1e-3, "{e1}");
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn exact_equilibrium_has_zero_residual() {
        let grid = HalfLineGrid::new(10.0, 100).unwrap();
        let model = m1();
        let flat = ProfileBundle::flat(grid, 0.0, 1.0, 1.0);
        let mut snaps: Vec<_> = (0..3)
            .map(|i| {
                let mut b = flat.clone();
                b.t = i as f64;
                let s = StateField::new(grid.constant(1.0), grid.zeros()).unwrap();
                build_perturbation(i as f64, &s, &b, &model).unwrap()
            })
            .collect();
        attach_time_derivatives(&mut snaps).unwrap();
        assert_eq!(reformulation_residual(&snaps[1], &flat, &model).unwrap().linf(), 0.0);
        let ns = norm_series(&snaps).unwrap();
        assert!(ns.series.values().all(|s| s.iter().all(|&(_, v)| v == 0.0)));
        assert!(ns.monitor.iter().all(|&(_, n)| n == 0.0));
    }

    #[test]
    fn separable_norms_and_monotone_monitor() {
        let grid = HalfLineGrid::new(20.0, 400).unwrap();
        let model = m1();
        let alpha = 0.7;
        let bump = |x: f64| x * (-(x - 4.0).powi(2)).exp();
        let times: Vec<f64> = (0..12).map(|i| 0.5 * i as f64).collect();
        let mut snaps: Vec<_> = times
            .iter()
            .map(|&t| {
                let mut b = ProfileBundle::flat(grid, t, 1.0, alpha);
                b.t = t;
                let s = StateField::new(grid.constant(1.0), grid.sample(|x| (-alpha * t).exp() * 0.01 * bump(x))).unwrap();
                build_perturbation(t, &s, &b, &model).unwrap()
            })
            .collect();
        attach_time_derivatives(&mut snaps).unwrap();
        let ns = norm_series(&snaps).unwrap();
        let base = grid.sample(|x| 0.01 * bump(x)).l2();
        for &(t, n) in ns.get(&Quantity::l2(Subject::Z, 0, 0)).unwrap() {
            assert!((n - (-alpha * t).exp() * base).abs() <= 1e-15 * base);
        }
        assert!(ns.monitor.windows(2).all(|w| w[1].1 >= w[0].1));
        assert_eq!(ns.rows().len(), times.len() * (4 + 6 + 1));
    }

    #[test]
    fn too_few_snapshots() {
        let grid = HalfLineGrid::new(10.0, 100).unwrap();
        let flat = ProfileBundle::flat(grid, 0.0, 1.0, 1.0);
        let s = StateField::new(grid.constant(1.0), grid.zeros()).unwrap();
        let mut one = vec![build_perturbation(0.0, &s, &flat, &m1()).unwrap()];
        assert!(matches!(attach_time_derivatives(&mut one), Err(Error::InsufficientSamples { .. })));
        assert!(norm_series(&one).is_err());
    }

    #[test]
    fn sobolev_examples() {
        let grid = HalfLineGrid::new(40.0, 4000).unwrap();
        let zero = grid.zeros();
        let s = sobolev_sides(&zero);
        assert_eq!((s.sup, s.bound), (0.0, 0.0));
        assert!(s.holds());
        let f = grid.sample(|x| (-x).exp());
        let s = sobolev_sides(&f);
        assert!((s.bound - 1.0).abs() < 1e-3, "{}", s.bound);
        assert!(s.holds());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn sobolev_holds_on_random_bump_sums(
            bumps in proptest::collection::vec((-1.0f64..1.0, 0.0f64..30.0, 0.3f64..4.0), 1..6)
        ) {
            let grid = HalfLineGrid::new(60.0, 3000).unwrap();
            let f = grid.sample(|x| bumps.iter().map(|(a, c, w)| a * (-((x - c) / w).powi(2)).exp()).sum());
            prop_assert!(sobolev_inequality_check(&f), "{:?}", sobolev_sides(&f));
        }
    }
}
