//! End-to-end runs: profiles, simulation, perturbation analysis and decay
//! fits, plus the closure, kernel and profile checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::closure::{closure_identity_residual, eddington_chi, ModelSpec};
use crate::config::{NearWall, RunConfig};
use crate::decay::{
    decay_report, hypothesis_check, theorem_table, DecayFit, FitWindow, HypothesisFlags, Quantity, ReportLine,
    Subject, TheoremId, Verdict,
};
use crate::error::{Error, Result};
use crate::greens::{kernel_exponent, kernel_norm_scaling, linearized_residual, HeatKernel};
use crate::grid::{HalfLineGrid, NormKind};
use crate::perturbation::{
    attach_time_derivatives, build_perturbation, norm_series, time_consistency_residual, zero_mass_check, NormSeries,
    PerturbationSnapshot,
};
use crate::profiles::{
    bump_m0, compute_delta0, gaussian_phi0, solve_diffusion_wave, verify_correction_decay, Correction,
    CorrectionDecayCheck, DiffusionWaveSetup, ProfileBundle, ProfileSolverOptions,
};
use crate::solver::{run, Scenario, Trajectory};

/// Allowed relative error of the exponential correction decay.
pub const CORRECTION_TOLERANCE: f64 = 1e-12;

/// Everything needed before time stepping.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub grid: HalfLineGrid,
    pub model: ModelSpec,
    /// Wave amplitude implied by the initial data.
    pub delta0: f64,
    pub setup: DiffusionWaveSetup,
    pub correction: Correction,
    pub scenario: Scenario,
}

fn profile_options(cfg: &RunConfig) -> ProfileSolverOptions {
    ProfileSolverOptions {
        growth: cfg.profile.growth,
        dt_min: cfg.profile.dt_min,
        ..ProfileSolverOptions::default()
    }
}

/// Builds the grid, the initial data and the profile setup from a config.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let grid = cfg.resolve_grid()?;
    let alpha = model.alpha;
    let (v_plus, u_plus) = (cfg.far_field.v_plus, cfg.far_field.u_plus);
    let phi0 = gaussian_phi0(&grid, cfg.profile.phi0_center, cfg.profile.phi0_width);
    let correction = Correction::new(u_plus, alpha, bump_m0(&grid, cfg.profile.m0_support)?);
    let (vhat0, uhat0) = correction.at(0.0);
    let bump = cfg.perturbation.sample(&grid);

    let (v0, u0) = match cfg.perturbation.near_wall {
        NearWall::Ansatz => {
            let wave = cfg.profile.delta0.unwrap_or(u_plus / (alpha * phi0.integrate()));
            let setup = DiffusionWaveSetup::new(v_plus, wave, phi0.clone(), model.clone())?;
            let b0 = solve_diffusion_wave(&setup, None, &[0.0], &profile_options(cfg))?
                .pop()
                .expect("one output time");
            (&(&b0.vbar + &vhat0) + &bump, &b0.ubar + &uhat0)
        }
        NearWall::Plain => (bump.map(|b| v_plus + b), uhat0),
    };
    let delta0 = compute_delta0(&v0, v_plus, &phi0, u_plus, alpha)?;
    let setup = DiffusionWaveSetup::new(v_plus, delta0, phi0, model.clone())?;
    let mut scenario = Scenario::new(
        model.clone(),
        v0,
        u0,
        v_plus,
        u_plus,
        cfg.time.t_end,
        cfg.time.cfl,
        cfg.time.snapshot_times(),
    )?;
    scenario.theta = cfg.time.theta;
    scenario.tvb = cfg.time.tvb;
    scenario.validate()?;
    Ok(Prepared {
        grid,
        model,
        delta0,
        setup,
        correction,
        scenario,
    })
}

/// Result of a full simulation.
#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub config: RunConfig,
    pub prepared: Prepared,
    pub trajectory: Trajectory,
    pub profiles: Vec<ProfileBundle>,
    pub perturbations: Vec<PerturbationSnapshot>,
    pub norms: NormSeries,
    /// `int (v - vbar - vhat)` per snapshot.
    pub zero_mass: Vec<(f64, f64)>,
    pub hypotheses: HypothesisFlags,
    pub window: FitWindow,
    pub report: Vec<ReportLine>,
}

impl SimulationOutcome {
    pub fn passed(&self) -> bool {
        !self.report.iter().any(|l| l.verdict.is_failure())
    }

    pub fn line(&self, q: &Quantity) -> Option<&ReportLine> {
        self.report.iter().find(|l| l.quantity == *q)
    }

    /// Largest `|int (v - vbar - vhat)|` relative to `int v` at `t = 0`.
    pub fn max_zero_mass_drift(&self) -> f64 {
        let scale = self.trajectory.initial_mass.abs();
        let m0 = self.zero_mass.first().map_or(0.0, |z| z.1);
        self.zero_mass.iter().map(|z| (z.1 - m0).abs() / scale).fold(0.0, f64::max)
    }
}

/// Window over the positive snapshot times.
fn fit_window(cfg: &RunConfig, times: &[f64]) -> FitWindow {
    let positive: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();
    cfg.fit.window(&positive)
}

/// Profiles, hyperbolic solve, perturbation fields and decay fits.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationOutcome> {
    let prepared = prepare(cfg).map_err(|e| e.in_stage("setup"))?;
    let model = &prepared.model;
    let trajectory = run(&prepared.scenario).map_err(|e| e.in_stage("solver"))?;
    let times: Vec<f64> = trajectory.snapshots.iter().map(|s| s.t).collect();
    let profiles = solve_diffusion_wave(
        &prepared.setup,
        Some(&prepared.correction),
        &times,
        &profile_options(cfg),
    )
    .map_err(|e| e.in_stage("profiles"))?;

    let analyse = || -> Result<_> {
        let mut perturbations = Vec::with_capacity(times.len());
        let mut zero_mass = Vec::with_capacity(times.len());
        for (snap, bundle) in trajectory.snapshots.iter().zip(&profiles) {
            perturbations.push(build_perturbation(snap.t, &snap.state, bundle, model).map_err(|e| e.at_time(snap.t))?);
            zero_mass.push((snap.t, zero_mass_check(&snap.state, bundle)));
        }
        attach_time_derivatives(&mut perturbations)?;
        let norms = norm_series(&perturbations)?;
        Ok((perturbations, zero_mass, norms))
    };
    let (perturbations, zero_mass, norms) = analyse().map_err(|e| e.in_stage("perturbation"))?;

    let requested = cfg.theorem_id()?;
    let hypotheses = hypothesis_check(
        &perturbations[0].big_v,
        &perturbations[0].z,
        model.alpha,
        cfg.far_field.u_plus,
        requested,
        &cfg.hypotheses.params(),
    );
    let window = fit_window(cfg, &times);
    let report = decay_report(&norms.series, &theorem_table(requested), window, &cfg.fit.tolerances()?)
        .map_err(|e| e.in_stage("decay"))?;
    Ok(SimulationOutcome {
        config: cfg.clone(),
        prepared,
        trajectory,
        profiles,
        perturbations,
        norms,
        zero_mass,
        hypotheses,
        window,
        report,
    })
}

/// L2 norms of the consistency residuals at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyResiduals {
    pub cells: usize,
    /// `V_t - z`.
    pub time_consistency: f64,
    /// Linearized form of the `V` equation.
    pub linearized: f64,
}

/// Runs `cfg` with snapshots at `t0 + i h` for `i = -2..=2` and evaluates
/// both residuals at `t0`. Choosing `h` proportional to `dx` makes the
/// residuals converge at the order of the scheme.
///
/// The profiles are stepped with the fixed step `0.1 h dx`, since the
/// second time difference divides their time error by `h^2`.
pub fn consistency_residuals(cfg: &RunConfig, t0: f64, h: f64) -> Result<ConsistencyResiduals> {
    let mut cfg = cfg.clone();
    cfg.time.t_end = t0 + 2.0 * h;
    let prepared = prepare(&cfg)?;
    let mut scenario = prepared.scenario.clone();
    scenario.snapshot_times = (-2..=2).map(|i| t0 + i as f64 * h).collect();
    let trajectory = run(&scenario)?;
    let snaps: Vec<_> = trajectory.snapshots.iter().filter(|s| s.t > 0.0).collect();
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let step = 0.1 * h * prepared.grid.dx();
    let opts = ProfileSolverOptions {
        dt_min: step,
        dt_max: step,
        ..profile_options(&cfg)
    };
    let profiles = solve_diffusion_wave(&prepared.setup, Some(&prepared.correction), &times, &opts)?;
    let mut perturbations = snaps
        .iter()
        .zip(&profiles)
        .map(|(s, b)| build_perturbation(s.t, &s.state, b, &prepared.model))
        .collect::<Result<Vec<_>>>()?;
    attach_time_derivatives(&mut perturbations)?;
    let mid = perturbations.len() / 2;
    Ok(ConsistencyResiduals {
        cells: prepared.grid.cells(),
        time_consistency: time_consistency_residual(&perturbations[mid])?.l2(),
        linearized: linearized_residual(&perturbations[mid], &profiles[mid], &prepared.model)?.l2(),
    })
}

/// Result of a profile-only run.
#[derive(Debug, Clone)]
pub struct ProfileOutcome {
    pub config: RunConfig,
    pub grid: HalfLineGrid,
    pub bundles: Vec<ProfileBundle>,
    pub series: std::collections::BTreeMap<Quantity, Vec<(f64, f64)>>,
    pub window: FitWindow,
    pub report: Vec<ReportLine>,
    pub correction: Vec<CorrectionDecayCheck>,
}

impl ProfileOutcome {
    pub fn max_correction_error(&self) -> f64 {
        self.correction.iter().map(|c| c.relative_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        !self.report.iter().any(|l| l.verdict.is_failure()) && self.max_correction_error() <= CORRECTION_TOLERANCE
    }

    pub fn line(&self, q: &Quantity) -> Option<&ReportLine> {
        self.report.iter().find(|l| l.quantity == *q)
    }
}

/// Diffusion-wave decay fits and the exponential correction checks.
pub fn profile_check(cfg: &RunConfig) -> Result<ProfileOutcome> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let grid = cfg.resolve_grid()?;
    let delta0 = cfg
        .profile
        .delta0
        .ok_or_else(|| Error::Config("profile checks need profile.delta0".into()))?;
    let phi0 = gaussian_phi0(&grid, cfg.profile.phi0_center, cfg.profile.phi0_width);
    let setup = DiffusionWaveSetup::new(cfg.far_field.v_plus, delta0, phi0, model.clone())?;
    let times = cfg.time.snapshot_times();
    let bundles =
        solve_diffusion_wave(&setup, None, &times, &profile_options(cfg)).map_err(|e| e.in_stage("profiles"))?;

    let table = theorem_table(TheoremId::Lemma21);
    let mut series = std::collections::BTreeMap::new();
    for q in table.entries.keys() {
        let s: Vec<(f64, f64)> = bundles
            .iter()
            .map(|b| Ok((b.t, b.deviation_derivative(q.k, q.j)?.norm(q.norm))))
            .collect::<Result<_>>()?;
        series.insert(*q, s);
    }
    let window = fit_window(cfg, &times);
    let report =
        decay_report(&series, &table, window, &cfg.fit.tolerances()?).map_err(|e| e.in_stage("decay"))?;

    let correction = Correction::new(cfg.far_field.u_plus, model.alpha, bump_m0(&grid, cfg.profile.m0_support)?);
    let check_times: Vec<f64> = (0..=20).map(|i| i as f64).collect();
    Ok(ProfileOutcome {
        config: cfg.clone(),
        grid,
        bundles,
        series,
        window,
        report,
        correction: verify_correction_decay(&correction, &check_times),
    })
}

/// Closure identity and Eddington-factor checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    /// Points of the `(rho, u)` grid plus random samples.
    pub identity_samples: usize,
    pub max_identity_residual: f64,
    pub chi_samples: usize,
    pub chi_min: f64,
    pub chi_max: f64,
    /// `chi` nondecreasing in `|u|` over the sorted samples.
    pub chi_monotone: bool,
}

impl ClosureReport {
    pub fn chi_in_range(&self) -> bool {
        self.chi_min >= 1.0 / 3.0 - 1e-15 && self.chi_max <= 1.0 + 1e-15
    }
}

/// Evaluates the closure identity on an `n x n` grid of `rho in [0, 10]`,
/// `u in [-1, 1]` plus `random` seeded samples, and `chi` on `chi_samples`
/// sorted values of `|u|`.
pub fn closure_check(n: usize, random: usize, chi_samples: usize, seed: u64) -> Result<ClosureReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_identity_residual = 0.0f64;
    let mut count = 0;
    let lin = |i: usize, lo: f64, hi: f64| lo + (hi - lo) * i as f64 / (n.max(2) - 1) as f64;
    for i in 0..n {
        for j in 0..n {
            max_identity_residual = max_identity_residual.max(closure_identity_residual(lin(i, 0.0, 10.0), lin(j, -1.0, 1.0))?);
            count += 1;
        }
    }
    for _ in 0..random {
        let rho = rng.random_range(0.0..=10.0);
        let u = rng.random_range(-1.0..=1.0);
        max_identity_residual = max_identity_residual.max(closure_identity_residual(rho, u)?);
        count += 1;
    }
    let mut us: Vec<f64> = (0..chi_samples).map(|_| rng.random_range(-1.0..=1.0)).collect();
    us.push(0.0);
    us.push(1.0);
    us.sort_by(|a: &f64, b: &f64| a.abs().total_cmp(&b.abs()));
    let chis: Vec<f64> = us.iter().map(|&u| eddington_chi(u)).collect::<Result<_>>()?;
    Ok(ClosureReport {
        identity_samples: count,
        max_identity_residual,
        chi_samples: chis.len(),
        chi_min: chis.iter().copied().fold(f64::INFINITY, f64::min),
        chi_max: chis.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        chi_monotone: chis.windows(2).all(|w| w[1] >= w[0]),
    })
}

/// One measured kernel-norm exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelScalingLine {
    pub k: usize,
    pub j: usize,
    pub p: f64,
    pub expected: f64,
    pub fit: DecayFit,
}

impl KernelScalingLine {
    pub fn gap(&self) -> f64 {
        self.fit.exponent - self.expected
    }
}

/// Orders and exponents measured by [`greens_check`].
pub const KERNEL_CASES: [(usize, usize, f64); 10] = [
    (0, 0, 1.0),
    (0, 0, 2.0),
    (0, 0, f64::INFINITY),
    (1, 0, 1.0),
    (1, 0, 2.0),
    (1, 0, f64::INFINITY),
    (0, 1, 1.0),
    (0, 1, 2.0),
    (2, 0, 2.0),
    (1, 1, 2.0),
];

/// Log-log slopes of `|| d_x^k d_t^j G(t) ||_p` over `times`.
pub fn greens_check(diffusivity: f64, times: &[f64]) -> Result<Vec<KernelScalingLine>> {
    let kernel = HeatKernel::new(diffusivity)?;
    KERNEL_CASES
        .iter()
        .filter(|(k, j, _)| k + j <= 2)
        .map(|&(k, j, p)| {
            Ok(KernelScalingLine {
                k,
                j,
                p,
                expected: kernel_exponent(k, j, p),
                fit: kernel_norm_scaling(&kernel, k, j, p, times)?,
            })
        })
        .collect()
}

/// Either kind of run.
#[derive(Debug, Clone)]
pub enum Outcome {
    Simulation(Box<SimulationOutcome>),
    Profile(Box<ProfileOutcome>),
}

impl Outcome {
    pub fn passed(&self) -> bool {
        match self {
            Outcome::Simulation(s) => s.passed(),
            Outcome::Profile(p) => p.passed(),
        }
    }

    pub fn report(&self) -> &[ReportLine] {
        match self {
            Outcome::Simulation(s) => &s.report,
            Outcome::Profile(p) => &p.report,
        }
    }

    pub fn config(&self) -> &RunConfig {
        match self {
            Outcome::Simulation(s) => &s.config,
            Outcome::Profile(p) => &p.config,
        }
    }
}

/// Dispatches on the theorem id: lemma ids run the profile check, others simulate.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.is_profile_only()? {
        Ok(Outcome::Profile(Box::new(profile_check(cfg)?)))
    } else {
        Ok(Outcome::Simulation(Box::new(simulate(cfg)?)))
    }
}

/// Runs several configs on a pool of `threads` workers. Results keep the input order.
pub fn sweep(configs: &[RunConfig], threads: usize) -> Result<Vec<Result<Outcome>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| configs.par_iter().map(execute).collect()))
}

/// Counts of each verdict.
pub fn verdict_counts(lines: &[ReportLine]) -> [(Verdict, usize); 4] {
    let count = |v| lines.iter().filter(|l| l.verdict == v).count();
    [
        (Verdict::Pass, count(Verdict::Pass)),
        (Verdict::Fail, count(Verdict::Fail)),
        (Verdict::Degenerate, count(Verdict::Degenerate)),
        (Verdict::Ungated, count(Verdict::Ungated)),
    ]
}

/// `|| V ||` quantity in L2, the headline number of most runs.
pub const V_L2: Quantity = Quantity::new(Subject::V, 0, 0, NormKind::L2);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    #[test]
    fn closure_report_small() {
        let r = closure_check(20, 100, 1000, 3).unwrap();
        assert_eq!(r.identity_samples, 500);
        assert!(r.max_identity_residual < 1e-14);
        assert!(r.chi_monotone && r.chi_in_range());
        assert!((r.chi_min - 1.0 / 3.0).abs() < 1e-15 && (r.chi_max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_is_degenerate() {
        let out = simulate(&preset("equilibrium").unwrap()).unwrap();
        assert!(out.report.iter().all(|l| l.verdict == Verdict::Degenerate));
        assert!(out.passed());
        assert_eq!(out.prepared.delta0, 0.0);
        for p in &out.perturbations {
            assert_eq!(p.big_v.linf(), 0.0);
            assert_eq!(p.z.linf(), 0.0);
        }
    }

    #[test]
    fn ansatz_wall_layer_leaves_only_the_bump() {
        let mut cfg = preset("m1-small").unwrap();
        cfg.grid.cells = 2048;
        cfg.time.t_end = 1.0;
        let p = prepare(&cfg).unwrap();
        // dipole has zero mass, so the implied amplitude is the built-in one
        let phi_mass = p.setup.phi0.integrate();
        assert!((p.delta0 - 0.02 / phi_mass).abs() < 1e-14);
        let grid = p.grid;
        let v_excess = (&p.scenario.v0 - &grid.constant(1.0)).integrate();
        assert!(v_excess.abs() < 1e-12);
        let b = solve_diffusion_wave(&p.setup, Some(&p.correction), &[0.0], &ProfileSolverOptions::default())
            .unwrap()
            .pop()
            .unwrap();
        let pert = build_perturbation(0.0, &p.scenario.initial_state(), &b, &p.model).unwrap();
        assert!(pert.z.linf() < 1e-15);
        for (j, &v) in pert.big_v.values().iter().enumerate() {
            if grid.x(j) < 200.0 {
                assert!(v.abs() < 1e-14, "{} {v}", grid.x(j));
            }
        }
    }

    #[test]
    fn sweep_keeps_order() {
        let mut a = preset("equilibrium").unwrap();
        a.name = "a".into();
        let mut b = a.clone();
        b.name = "b".into();
        b.time.t_end = 50.0;
        let out = sweep(&[a, b], 2).unwrap();
        let names: Vec<_> = out.iter().map(|o| o.as_ref().unwrap().config().name.clone()).collect();
        assert_eq!(names, ["a", "b"]);
    }
}
