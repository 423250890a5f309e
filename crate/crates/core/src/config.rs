//! Run configuration: a TOML document with one section per concern.
//!
//! ```toml
//! name = "m1-small"
//! theorem = "thm2_improved"
//! seed = 7
//!
//! [model]
//! kind = "m1"
//! alpha = 1.0
//!
//! [far_field]
//! v_plus = 1.0
//! u_plus = 0.02
//!
//! [grid]
//! length = "auto"
//! cells = 8192
//!
//! [perturbation]
//! shape = "dipole"
//! amplitude = 0.01
//! center = 250.0
//! width = 3.0
//!
//! [time]
//! t_end = 5000.0
//!
//! [[fit.gate]]
//! subject = "V"
//! k = 0
//! tolerance = 0.1
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::closure::ModelSpec;
use crate::decay::{FitWindow, HypothesisParams, Quantity, Subject, TheoremId, Tolerances};
use crate::error::{Error, Result};
use crate::grid::{Field, HalfLineGrid, NormKind};
use crate::solver::{auto_length, geometric_times, DEFAULT_CFL, DEFAULT_SNAPSHOTS_PER_DECADE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    M1 {
        #[serde(default = "one")]
        alpha: f64,
    },
    GammaLaw {
        gamma: f64,
        #[serde(default = "one")]
        alpha: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec> {
        match *self {
            ModelConfig::M1 { alpha } => ModelSpec::m1(alpha),
            ModelConfig::GammaLaw { gamma, alpha } => ModelSpec::gamma_law(gamma, alpha),
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            ModelConfig::M1 { alpha } | ModelConfig::GammaLaw { alpha, .. } => alpha,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarFieldConfig {
    pub v_plus: f64,
    #[serde(default)]
    pub u_plus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

/// Either a fixed length or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthSpec {
    Fixed(f64),
    Auto(AutoKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: LengthSpec,
    pub cells: usize,
}

/// Shape of the initial volume perturbation, with `s = (x - center) / width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    None,
    /// `exp(-s^2/2)`.
    Gaussian,
    /// `-sqrt(e) s exp(-s^2/2)`: zero mass, peak one.
    Dipole,
    /// `(1 - s^2) exp(-s^2/2)`: zero mass and zero first moment.
    Quadrupole,
}

impl Shape {
    pub fn eval(&self, s: f64) -> f64 {
        let g = (-0.5 * s * s).exp();
        match self {
            Shape::None => 0.0,
            Shape::Gaussian => g,
            Shape::Dipole => -std::f64::consts::E.sqrt() * s * g,
            Shape::Quadrupole => (1.0 - s * s) * g,
        }
    }
}

/// What the data look like next to the wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NearWall {
    /// `v0 = v_plus + delta phi0 + vhat(0) + perturbation`, `u0 = ubar(0) + uhat(0)`:
    /// the wall layer starts on the ansatz.
    Ansatz,
    /// `v0 = v_plus + perturbation`, `u0 = uhat(0)`.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub shape: Shape,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default = "default_near_wall")]
    pub near_wall: NearWall,
}

fn default_near_wall() -> NearWall {
    NearWall::Ansatz
}

impl PerturbationConfig {
    pub fn none() -> Self {
        Self {
            shape: Shape::None,
            amplitude: 0.0,
            center: 0.0,
            width: 1.0,
            near_wall: NearWall::Ansatz,
        }
    }

    pub fn sample(&self, grid: &HalfLineGrid) -> Field {
        grid.sample(|x| self.amplitude * self.shape.eval((x - self.center) / self.width))
    }

    /// Right end of the numerical support.
    pub fn support(&self) -> f64 {
        match self.shape {
            Shape::None => 0.0,
            _ => self.center + 10.0 * self.width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    /// Wave amplitude. Profile-only runs use it directly; simulations
    /// build it into the wall layer, defaulting to `u_plus / (alpha int phi0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default = "two")]
    pub phi0_center: f64,
    #[serde(default = "two")]
    pub phi0_width: f64,
    #[serde(default = "two")]
    pub m0_support: f64,
    #[serde(default = "default_growth")]
    pub growth: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
}

fn two() -> f64 {
    2.0
}
fn default_growth() -> f64 {
    5e-3
}
fn default_dt_min() -> f64 {
    1e-3
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            delta0: None,
            phi0_center: 2.0,
            phi0_width: 2.0,
            m0_support: 2.0,
            growth: default_growth(),
            dt_min: default_dt_min(),
        }
    }
}

impl ProfileConfig {
    pub fn support(&self) -> f64 {
        (self.phi0_center + 6.0 * self.phi0_width).max(self.m0_support)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Generalized-minmod parameter in `[1, 2]`.
    #[serde(default = "one")]
    pub theta: f64,
    /// TVB constant; zero keeps the plain limiter.
    #[serde(default)]
    pub tvb: f64,
    #[serde(default = "default_first")]
    pub first_snapshot: f64,
    #[serde(default = "default_per_decade")]
    pub snapshots_per_decade: usize,
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}
fn default_first() -> f64 {
    1.0
}
fn default_per_decade() -> usize {
    DEFAULT_SNAPSHOTS_PER_DECADE
}

impl TimeConfig {
    pub fn snapshot_times(&self) -> Vec<f64> {
        geometric_times(self.first_snapshot, self.t_end, self.snapshots_per_decade)
    }
}

/// A gated table entry: the fit must land within `tolerance` of the expected exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gate {
    pub subject: String,
    #[serde(default)]
    pub k: usize,
    #[serde(default)]
    pub j: usize,
    #[serde(default = "default_norm")]
    pub norm: String,
    pub tolerance: f64,
}

fn default_norm() -> String {
    "L2".into()
}

impl Gate {
    pub fn quantity(&self) -> Result<Quantity> {
        let subject = match self.subject.as_str() {
            "V" => Subject::V,
            "z" => Subject::Z,
            "vbar-v+" | "profile" => Subject::Profile,
            "vhat" => Subject::VHat,
            "uhat" => Subject::UHat,
            other => {
                return Err(Error::Unknown {
                    kind: "subject",
                    name: other.into(),
                })
            }
        };
        let norm = NormKind::parse(&self.norm).ok_or_else(|| Error::Unknown {
            kind: "norm",
            name: self.norm.clone(),
        })?;
        Ok(Quantity::new(subject, self.k, self.j, norm))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "default_decades")]
    pub window_decades: f64,
    #[serde(default = "default_discard")]
    pub discard_fraction: f64,
    #[serde(default, rename = "gate", skip_serializing_if = "Vec::is_empty")]
    pub gates: Vec<Gate>,
}

fn default_decades() -> f64 {
    crate::decay::DEFAULT_WINDOW_DECADES
}
fn default_discard() -> f64 {
    crate::decay::DEFAULT_DISCARD_FRACTION
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            window_decades: default_decades(),
            discard_fraction: default_discard(),
            gates: Vec::new(),
        }
    }
}

impl FitConfig {
    pub fn window(&self, times: &[f64]) -> FitWindow {
        FitWindow::last_decades(times, self.window_decades, self.discard_fraction)
    }

    pub fn tolerances(&self) -> Result<Tolerances> {
        self.gates.iter().map(|g| Ok((g.quantity()?, g.tolerance))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Times written to the field CSVs (log-spaced through the snapshots).
    #[serde(default = "default_field_times")]
    pub field_times: usize,
    /// Upper bound on points per field CSV time slice.
    #[serde(default = "default_field_points")]
    pub field_points: usize,
    #[serde(default = "yes")]
    pub plots: bool,
}

fn default_field_times() -> usize {
    8
}
fn default_field_points() -> usize {
    1024
}
fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            field_times: default_field_times(),
            field_points: default_field_points(),
            plots: true,
        }
    }
}

/// Parameters of the integrability and zero-mass proxies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisConfig {
    #[serde(default = "default_x_star")]
    pub x_star_fraction: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_zero_mass_tol")]
    pub zero_mass_tol: f64,
}

fn default_x_star() -> f64 {
    HypothesisParams::default().x_star_fraction
}
fn default_epsilon() -> f64 {
    HypothesisParams::default().epsilon
}
fn default_zero_mass_tol() -> f64 {
    HypothesisParams::default().zero_mass_tol
}

impl Default for HypothesisConfig {
    fn default() -> Self {
        let p = HypothesisParams::default();
        Self {
            x_star_fraction: p.x_star_fraction,
            epsilon: p.epsilon,
            zero_mass_tol: p.zero_mass_tol,
        }
    }
}

impl HypothesisConfig {
    pub fn params(&self) -> HypothesisParams {
        HypothesisParams {
            x_star_fraction: self.x_star_fraction,
            epsilon: self.epsilon,
            zero_mass_tol: self.zero_mass_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub theorem: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub model: ModelConfig,
    pub far_field: FarFieldConfig,
    pub grid: GridConfig,
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub profile: ProfileConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub hypotheses: HypothesisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn theorem_id(&self) -> Result<TheoremId> {
        TheoremId::parse(&self.theorem)
    }

    /// Profile-only runs need no hyperbolic simulation.
    pub fn is_profile_only(&self) -> Result<bool> {
        Ok(matches!(self.theorem_id()?, TheoremId::Lemma21 | TheoremId::Lemma22))
    }

    pub fn validate(&self) -> Result<()> {
        self.theorem_id()?;
        self.model.build()?;
        self.fit.tolerances()?;
        if !(self.time.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end = {} must be nonnegative", self.time.t_end)));
        }
        if let LengthSpec::Fixed(l) = self.grid.length {
            if !(l > 0.0) {
                return Err(Error::Config(format!("grid length {l} must be positive")));
            }
        }
        if self.is_profile_only()? && self.profile.delta0.is_none() {
            return Err(Error::Config("profile-only runs need profile.delta0".into()));
        }
        Ok(())
    }

    /// Resolves `"auto"` from `10 sqrt(D t_end) + support`.
    pub fn resolve_grid(&self) -> Result<HalfLineGrid> {
        let length = match self.grid.length {
            LengthSpec::Fixed(l) => l,
            LengthSpec::Auto(_) => {
                let model = self.model.build()?;
                let d = model.diffusivity(self.far_field.v_plus);
                let support = self.perturbation.support().max(self.profile.support());
                auto_length(d, self.time.t_end, support)
            }
        };
        HalfLineGrid::new(length, self.grid.cells)
    }
}

/// Names of the bundled presets.
pub const PRESETS: [&str; 5] = ["m1-small", "thm2-improved", "psystem-faster", "lemma21", "equilibrium"];

fn gate(subject: &str, k: usize, j: usize, norm: &str, tolerance: f64) -> Gate {
    Gate {
        subject: subject.into(),
        k,
        j,
        norm: norm.into(),
        tolerance,
    }
}

/// A bundled configuration.
pub fn preset(name: &str) -> Result<RunConfig> {
    let base = |name: &str, theorem: &str| RunConfig {
        name: name.into(),
        theorem: theorem.into(),
        seed: 7,
        out_dir: None,
        model: ModelConfig::M1 { alpha: 1.0 },
        far_field: FarFieldConfig {
            v_plus: 1.0,
            u_plus: 0.0,
        },
        grid: GridConfig {
            length: LengthSpec::Auto(AutoKeyword::Auto),
            cells: 8192,
        },
        perturbation: PerturbationConfig::none(),
        profile: ProfileConfig::default(),
        time: TimeConfig {
            t_end: 5000.0,
            cfl: DEFAULT_CFL,
            theta: 1.0,
            tvb: 0.0,
            first_snapshot: 1.0,
            snapshots_per_decade: DEFAULT_SNAPSHOTS_PER_DECADE,
        },
        fit: FitConfig::default(),
        hypotheses: HypothesisConfig::default(),
        output: OutputConfig::default(),
    };
    let cfg = match name {
        // far-field velocity and a zero-mass volume dipole placed away from the
        // wall, so that V0 is a localized bump of nonzero mass
        "m1-small" | "thm2-improved" => {
            let mut c = base(name, "thm2_improved");
            c.far_field.u_plus = 0.02;
            c.perturbation = PerturbationConfig {
                shape: Shape::Dipole,
                amplitude: 0.01,
                center: 250.0,
                width: 3.0,
                near_wall: NearWall::Ansatz,
            };
            c.fit.gates = vec![gate("V", 0, 0, "L2", 0.10), gate("V", 1, 0, "L2", 0.10), gate("z", 0, 0, "L2", 0.15)];
            c
        }
        // damped Euler, u_plus = 0, zero-mass and zero-moment data
        "psystem-faster" => {
            let mut c = base(name, "thm2_faster");
            c.model = ModelConfig::GammaLaw { gamma: 1.4, alpha: 1.0 };
            c.perturbation = PerturbationConfig {
                shape: Shape::Quadrupole,
                amplitude: 0.01,
                center: 400.0,
                width: 3.0,
                near_wall: NearWall::Ansatz,
            };
            c.fit.gates = vec![gate("V", 0, 0, "L2", 0.12)];
            c
        }
        "lemma21" => {
            let mut c = base(name, "lemma2.1");
            c.far_field.u_plus = 0.02;
            c.profile.delta0 = Some(0.05);
            c.time.t_end = 1e4;
            c.fit.gates = vec![
                gate("vbar-v+", 0, 0, "L2", 0.05),
                gate("vbar-v+", 1, 0, "L2", 0.07),
                gate("vbar-v+", 0, 0, "Linf", 0.07),
            ];
            c
        }
        "equilibrium" => {
            let mut c = base(name, "thm2_improved");
            c.grid = GridConfig {
                length: LengthSpec::Fixed(50.0),
                cells: 256,
            };
            c.time.t_end = 100.0;
            c.output.plots = false;
            c
        }
        other => {
            return Err(Error::Unknown {
                kind: "preset",
                name: other.into(),
            })
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            let text = cfg.to_toml();
            let back = RunConfig::from_toml(&text).unwrap();
            assert_eq!(back, cfg, "{name}");
            assert_eq!(back.to_toml(), text);
            assert_eq!(back.hash(), cfg.hash());
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn parses_handwritten_config() {
        let text = r#"
            name = "demo"
            theorem = "thm1"

            [model]
            kind = "gamma-law"
            gamma = 2.0

            [far_field]
            v_plus = 1.5

            [grid]
            length = 120.0
            cells = 600

            [perturbation]
            shape = "gaussian"
            amplitude = 0.02
            center = 20.0
            width = 2.0
            near_wall = "plain"

            [time]
            t_end = 50.0

            [[fit.gate]]
            subject = "V"
            k = 1
            tolerance = 0.1
        "#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.model, ModelConfig::GammaLaw { gamma: 2.0, alpha: 1.0 });
        assert_eq!(cfg.grid.length, LengthSpec::Fixed(120.0));
        assert_eq!(cfg.perturbation.near_wall, NearWall::Plain);
        assert_eq!(cfg.fit.gates[0].quantity().unwrap(), Quantity::l2(Subject::V, 1, 0));
        assert_eq!(cfg.resolve_grid().unwrap().cells(), 600);
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let good = preset("m1-small").unwrap().to_toml();
        assert!(RunConfig::from_toml(&good.replace("thm2_improved", "thm9")).is_err());
        assert!(RunConfig::from_toml(&format!("{good}\nbogus = 1\n")).is_err());
        assert!(RunConfig::from_toml("name = 1").is_err());
    }

    #[test]
    fn auto_length_rule() {
        let cfg = preset("m1-small").unwrap();
        let grid = cfg.resolve_grid().unwrap();
        let expected = 10.0 * (5000.0f64 / 3.0).sqrt() + 280.0;
        assert!((grid.length() - expected).abs() < 1e-9);
    }

    #[test]
    fn shapes() {
        let grid = HalfLineGrid::new(100.0, 10000).unwrap();
        let p = |shape| PerturbationConfig {
            shape,
            amplitude: 1.0,
            center: 50.0,
            width: 3.0,
            near_wall: NearWall::Plain,
        };
        let d = p(Shape::Dipole).sample(&grid);
        assert!(d.integrate().abs() < 1e-12);
        assert!((d.linf() - 1.0).abs() < 1e-4);
        let q = p(Shape::Quadrupole).sample(&grid);
        assert!(q.integrate().abs() < 1e-12);
        let moment = grid.sample(|x| x).zip_map(&q, |x, f| x * f).integrate();
        assert!(moment.abs() < 1e-9);
    }
}
