//! Power-law decay fits and the exponent tables they are compared against.
//!
//! Every fit is an ordinary least-squares line through
//! `(log(1 + t), log value)`; the slope is the decay exponent.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Field, NormKind};

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Default window: the last this-many decades of the series.
pub const DEFAULT_WINDOW_DECADES: f64 = 1.5;

/// Fraction of in-window samples dropped at the start of the default window.
pub const DEFAULT_DISCARD_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub t_min: f64,
    pub t_max: f64,
}

impl FitWindow {
    pub fn new(t_min: f64, t_max: f64) -> Self {
        Self { t_min, t_max }
    }

    /// Last `decades` decades of `times`, with the first `discard` fraction
    /// of the samples inside that range dropped.
    pub fn last_decades(times: &[f64], decades: f64, discard: f64) -> Self {
        let t_end = times.iter().copied().fold(0.0, f64::max);
        let start = t_end / 10f64.powf(decades);
        let inside: Vec<f64> = times.iter().copied().filter(|&t| t >= start).collect();
        let skip = (inside.len() as f64 * discard).floor() as usize;
        let t_min = inside.get(skip).copied().unwrap_or(start);
        Self { t_min, t_max: t_end }
    }

    pub fn default_for(times: &[f64]) -> Self {
        Self::last_decades(times, DEFAULT_WINDOW_DECADES, DEFAULT_DISCARD_FRACTION)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }
}

/// Result of a log-log fit, optionally judged against an expected exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub quantity: String,
    pub window: FitWindow,
    pub samples: usize,
    pub exponent: f64,
    pub log_amplitude: f64,
    pub r_squared: f64,
    pub expected: Option<f64>,
    pub tolerance: Option<f64>,
}

impl DecayFit {
    pub fn gap(&self) -> Option<f64> {
        self.expected.map(|e| self.exponent - e)
    }

    pub fn passed(&self) -> Option<bool> {
        match (self.gap(), self.tolerance) {
            (Some(g), Some(tol)) => Some(g.abs() <= tol),
            _ => None,
        }
    }

    pub fn judged(mut self, expected: f64, tolerance: f64) -> Self {
        self.expected = Some(expected);
        self.tolerance = Some(tolerance);
        self
    }
}

/// Least-squares slope of `log value` against `log(1 + t)` inside `window`.
pub fn fit_exponent(series: &[(f64, f64)], window: FitWindow) -> Result<DecayFit> {
    if window.t_min >= window.t_max {
        return Err(Error::Domain {
            what: "window length",
            value: window.t_max - window.t_min,
            domain: "t_min < t_max",
        });
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Mismatch("series times must increase".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, value) in series.iter().filter(|(t, _)| window.contains(*t)) {
        if !(value > 0.0) {
            return Err(Error::NonPositive { t, value });
        }
        xs.push((1.0 + t).ln());
        ys.push(value.ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            need: MIN_FIT_SAMPLES,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit {
        quantity: String::new(),
        window,
        samples: xs.len(),
        exponent: slope,
        log_amplitude: intercept,
        r_squared,
        expected: None,
        tolerance: None,
    })
}

/// The field whose norm decays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subject {
    /// Antiderivative perturbation `V`.
    V,
    /// Velocity perturbation `z`.
    Z,
    /// Diffusion-wave deviation `vbar - v_plus`.
    Profile,
    /// Volume correction `vhat`.
    VHat,
    /// Velocity correction `uhat`.
    UHat,
}

impl Subject {
    pub fn label(&self) -> &'static str {
        match self {
            Subject::V => "V",
            Subject::Z => "z",
            Subject::Profile => "vbar-v+",
            Subject::VHat => "vhat",
            Subject::UHat => "uhat",
        }
    }
}

/// `|| d_x^k d_t^j subject ||` in a given norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quantity {
    pub subject: Subject,
    pub k: usize,
    pub j: usize,
    pub norm: NormKind,
}

impl Quantity {
    pub const fn new(subject: Subject, k: usize, j: usize, norm: NormKind) -> Self {
        Self { subject, k, j, norm }
    }

    pub const fn l2(subject: Subject, k: usize, j: usize) -> Self {
        Self::new(subject, k, j, NormKind::L2)
    }

    /// Stable name used as a series key and in reports, e.g. `d_x^1 d_t^0 V [L2]`.
    pub fn name(&self) -> String {
        format!(
            "d_x^{} d_t^{} {} [{}]",
            self.k,
            self.j,
            self.subject.label(),
            self.norm.label()
        )
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Predicted decay law of a table entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expected {
    /// `(1 + t)^exponent`.
    Power(f64),
    /// `exp(-factor * alpha * t)`.
    Exponential { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    Thm1,
    Thm2Improved,
    Thm2Faster,
    Lemma21,
    Lemma22,
}

impl TheoremId {
    pub const ALL: [TheoremId; 5] = [
        TheoremId::Thm1,
        TheoremId::Thm2Improved,
        TheoremId::Thm2Faster,
        TheoremId::Lemma21,
        TheoremId::Lemma22,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::Thm1 => "thm1",
            TheoremId::Thm2Improved => "thm2_improved",
            TheoremId::Thm2Faster => "thm2_faster",
            TheoremId::Lemma21 => "lemma2.1",
            TheoremId::Lemma22 => "lemma2.2",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == name || id.as_str().replace('.', "") == name)
            .ok_or_else(|| Error::Unknown {
                kind: "theorem id",
                name: name.to_string(),
            })
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hypotheses a table relies on beyond smallness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Hypotheses {
    /// `V0 + z0/alpha` integrable.
    pub l1_data: bool,
    /// `int (V0 + z0/alpha) = 0`, `W0` integrable and `u_plus = 0`.
    pub zero_mass: bool,
}

/// Expected exponents of one theorem or lemma.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremTable {
    pub id: TheoremId,
    pub entries: BTreeMap<Quantity, Expected>,
    pub hypotheses: Hypotheses,
}

impl TheoremTable {
    pub fn expected(&self, q: &Quantity) -> Option<Expected> {
        self.entries.get(q).copied()
    }

    pub fn power(&self, q: &Quantity) -> Option<f64> {
        match self.expected(q)? {
            Expected::Power(e) => Some(e),
            Expected::Exponential { .. } => None,
        }
    }
}

/// `(k, j)` pairs with `k + j <= 2`, `j <= 1` used for the velocity perturbation.
const Z_ORDERS: [(usize, usize); 5] = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1)];

/// The printed exponent tables.
pub fn theorem_table(id: TheoremId) -> TheoremTable {
    let mut entries = BTreeMap::new();
    let mut hypotheses = Hypotheses::default();
    let mut perturbation = |v_offset: f64, z_offset: f64, ztt: f64, k_min: usize| {
        for k in k_min..=3 {
            entries.insert(
                Quantity::l2(Subject::V, k, 0),
                Expected::Power(-(k as f64) / 2.0 - v_offset),
            );
        }
        for (k, j) in Z_ORDERS {
            entries.insert(
                Quantity::l2(Subject::Z, k, j),
                Expected::Power(-(k as f64) / 2.0 - j as f64 - z_offset),
            );
        }
        entries.insert(Quantity::l2(Subject::Z, 0, 2), Expected::Power(ztt));
    };
    match id {
        TheoremId::Thm1 => perturbation(0.0, 1.0, -2.5, 1),
        TheoremId::Thm2Improved => {
            hypotheses.l1_data = true;
            perturbation(0.25, 1.25, -2.75, 0)
        }
        TheoremId::Thm2Faster => {
            hypotheses.l1_data = true;
            hypotheses.zero_mass = true;
            perturbation(0.75, 1.75, -3.25, 0)
        }
        TheoremId::Lemma21 => {
            for k in 0..=2 {
                for j in 0..=1 {
                    let (kf, jf) = (k as f64, j as f64);
                    entries.insert(
                        Quantity::new(Subject::Profile, k, j, NormKind::L2),
                        Expected::Power(-(4.0 * jf + 2.0 * kf + 1.0) / 4.0),
                    );
                    entries.insert(
                        Quantity::new(Subject::Profile, k, j, NormKind::L1),
                        Expected::Power(-(2.0 * jf + kf) / 2.0),
                    );
                    entries.insert(
                        Quantity::new(Subject::Profile, k, j, NormKind::Linf),
                        Expected::Power(-(2.0 * jf + kf + 1.0) / 2.0),
                    );
                }
            }
        }
        TheoremId::Lemma22 => {
            for norm in NormKind::ALL {
                for k in 0..=2 {
                    entries.insert(
                        Quantity::new(Subject::VHat, k, 0, norm),
                        Expected::Exponential { factor: 1.0 },
                    );
                }
                for k in 1..=2 {
                    entries.insert(
                        Quantity::new(Subject::UHat, k, 0, norm),
                        Expected::Exponential { factor: 1.0 },
                    );
                }
            }
            entries.insert(
                Quantity::new(Subject::UHat, 0, 0, NormKind::Linf),
                Expected::Exponential { factor: 1.0 },
            );
        }
    }
    TheoremTable {
        id,
        entries,
        hypotheses,
    }
}

/// Pass/fail outcome of one report line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The series is identically zero; no exponent exists.
    Degenerate,
    /// Reported only.
    Ungated,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Degenerate => "degenerate (zero series)",
            Verdict::Ungated => "reported",
        }
    }

    /// Whether this verdict blocks a zero exit code.
    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::Fail)
    }
}

/// One line of a decay report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportLine {
    pub quantity: Quantity,
    pub expected: f64,
    pub fit: Option<DecayFit>,
    pub verdict: Verdict,
}

/// Per-quantity tolerances; quantities absent from the map are reported ungated.
pub type Tolerances = BTreeMap<Quantity, f64>;

/// Fits every power-law entry of `table` found in `series`.
pub fn decay_report(
    series: &BTreeMap<Quantity, Vec<(f64, f64)>>,
    table: &TheoremTable,
    window: FitWindow,
    tolerances: &Tolerances,
) -> Result<Vec<ReportLine>> {
    let mut lines = Vec::new();
    for (q, expected) in &table.entries {
        let Expected::Power(expected) = *expected else {
            continue;
        };
        let Some(data) = series.get(q) else {
            continue;
        };
        let in_window: Vec<f64> = data
            .iter()
            .filter(|(t, _)| window.contains(*t))
            .map(|(_, v)| *v)
            .collect();
        if !in_window.is_empty() && in_window.iter().all(|&v| v == 0.0) {
            lines.push(ReportLine {
                quantity: *q,
                expected,
                fit: None,
                verdict: Verdict::Degenerate,
            });
            continue;
        }
        let mut fit = fit_exponent(data, window)?;
        fit.quantity = q.name();
        fit.expected = Some(expected);
        fit.tolerance = tolerances.get(q).copied();
        let verdict = match fit.passed() {
            Some(true) => Verdict::Pass,
            Some(false) => Verdict::Fail,
            None => Verdict::Ungated,
        };
        lines.push(ReportLine {
            quantity: *q,
            expected,
            fit: Some(fit),
            verdict,
        });
    }
    Ok(lines)
}

/// Parameters of the integrability proxies.
///
/// A field passes when `|f(x)| x^{1+eps}` beyond `x_star` never exceeds its
/// maximum over `[1, x_star]`; `x_star` is a fraction of the domain length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisParams {
    pub x_star_fraction: f64,
    pub epsilon: f64,
    /// `|int (V0 + z0/alpha)|` allowed, relative to its L1 norm.
    pub zero_mass_tol: f64,
}

impl Default for HypothesisParams {
    fn default() -> Self {
        Self {
            x_star_fraction: 0.75,
            epsilon: 0.1,
            zero_mass_tol: 1e-8,
        }
    }
}

/// Outcome of the hypothesis checks for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisFlags {
    pub requested: TheoremId,
    /// Tail proxy for `V0 + z0/alpha` in L1.
    pub l1_data: bool,
    /// Tail proxy for `W0 = int_0^x (V0 + z0/alpha)` in L1.
    pub w0_integrable: bool,
    /// `int (V0 + z0/alpha)`.
    pub mass: f64,
    pub zero_mass: bool,
    pub u_plus_zero: bool,
}

impl HypothesisFlags {
    pub fn satisfies(&self, id: TheoremId) -> bool {
        match id {
            TheoremId::Thm1 | TheoremId::Lemma21 | TheoremId::Lemma22 => true,
            TheoremId::Thm2Improved => self.l1_data,
            TheoremId::Thm2Faster => self.l1_data && self.w0_integrable && self.zero_mass && self.u_plus_zero,
        }
    }

    /// Whether the requested table applies.
    pub fn applies(&self) -> bool {
        self.satisfies(self.requested)
    }

    /// The strongest table whose hypotheses hold.
    pub fn strongest(&self) -> TheoremId {
        [TheoremId::Thm2Faster, TheoremId::Thm2Improved]
            .into_iter()
            .find(|&id| self.satisfies(id))
            .unwrap_or(TheoremId::Thm1)
    }
}

/// `max |f| x^{1+eps}` beyond `x_star` is at most its maximum over `[1, x_star]`.
pub fn tail_decay_proxy(f: &Field, x_star: f64, epsilon: f64) -> bool {
    let grid = f.grid();
    let (mut inner, mut outer) = (0.0f64, 0.0f64);
    for (j, &v) in f.values().iter().enumerate() {
        let x = grid.x(j);
        let weighted = v.abs() * x.powf(1.0 + epsilon);
        if x >= x_star {
            outer = outer.max(weighted);
        } else if x >= 1.0 {
            inner = inner.max(weighted);
        }
    }
    outer <= inner
}

/// Checks the extra hypotheses of the improved and faster decay statements
/// on the initial perturbation `(V0, z0)`.
pub fn hypothesis_check(
    big_v0: &Field,
    z0: &Field,
    alpha: f64,
    u_plus: f64,
    requested: TheoremId,
    params: &HypothesisParams,
) -> HypothesisFlags {
    let data = big_v0.zip_map(z0, |v, z| v + z / alpha);
    let w0 = data.cumulative_integrals();
    let x_star = params.x_star_fraction * data.grid().length();
    let mass = data.integrate();
    HypothesisFlags {
        requested,
        l1_data: tail_decay_proxy(&data, x_star, params.epsilon),
        w0_integrable: tail_decay_proxy(&w0, x_star, params.epsilon),
        mass,
        zero_mass: mass.abs() <= params.zero_mass_tol * data.l1(),
        u_plus_zero: u_plus == 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(t0: f64, t1: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| t0 * (t1 / t0).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    fn sampled(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        geometric(1.0, 1e4, 129).into_iter().map(|t| (t, f(t))).collect()
    }

    #[test]
    fn exact_power_law() {
        let s = sampled(|t| 3.0 * (1.0 + t).powf(-0.5));
        let fit = fit_exponent(&s, FitWindow::new(10.0, 1e4)).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-10);
        assert!((fit.log_amplitude - 3f64.ln()).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_has_zero_exponent() {
        let s = sampled(|_| 2.0);
        let fit = fit_exponent(&s, FitWindow::new(1.0, 1e4)).unwrap();
        assert!(fit.exponent.abs() < 1e-14);
    }

    #[test]
    fn log_corrected_law_drifts_toward_minus_one_from_above() {
        // d log f / d log(1+t) = -1 + 1/log(1+t) for f = (1+t)^-1 log(1+t)
        let s = sampled(|t| (1.0 + t).ln() / (1.0 + t));
        let mut previous = f64::NEG_INFINITY;
        for (a, b) in [(10.0, 100.0), (100.0, 1000.0), (1000.0, 1e4)] {
            let fit = fit_exponent(&s, FitWindow::new(a, b)).unwrap();
            let lo = -1.0 + 1.0 / (1.0 + b).ln();
            let hi = -1.0 + 1.0 / (1.0 + a).ln();
            assert!(fit.exponent > lo - 1e-3 && fit.exponent < hi + 1e-3);
            assert!(fit.exponent > -1.0);
            // the slope decreases toward -1 as the window moves right
            if previous.is_finite() {
                assert!(fit.exponent < previous);
            }
            previous = fit.exponent;
        }
    }

    #[test]
    fn rescaling_and_window_shift_invariance() {
        let s = sampled(|t| 0.7 * (1.0 + t).powf(-1.25));
        let scaled: Vec<_> = s.iter().map(|&(t, v)| (t, 1e-6 * v)).collect();
        let a = fit_exponent(&s, FitWindow::new(100.0, 400.0)).unwrap();
        let b = fit_exponent(&scaled, FitWindow::new(100.0, 400.0)).unwrap();
        let c = fit_exponent(&s, FitWindow::new(200.0, 800.0)).unwrap();
        assert!((a.exponent - b.exponent).abs() < 1e-12);
        assert!((a.exponent - c.exponent).abs() < 1e-8);
    }

    #[test]
    fn fit_errors() {
        let s = sampled(|t| if t > 500.0 { 0.0 } else { 1.0 });
        assert!(matches!(
            fit_exponent(&s, FitWindow::new(1.0, 1e4)),
            Err(Error::NonPositive { .. })
        ));
        let s = sampled(|_| 1.0);
        assert!(matches!(
            fit_exponent(&s, FitWindow::new(1.0, 1.2)),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn default_window_covers_last_decade_and_a_half() {
        let times = geometric(0.1, 1e4, 161);
        let w = FitWindow::default_for(&times);
        assert_eq!(w.t_max, 1e4);
        assert!(w.t_min > 1e4 / 10f64.powf(1.5));
        let n = times.iter().filter(|&&t| w.contains(t)).count();
        assert!(n >= MIN_FIT_SAMPLES);
    }

    #[test]
    fn printed_exponents() {
        let t1 = theorem_table(TheoremId::Thm1);
        assert_eq!(t1.power(&Quantity::l2(Subject::V, 1, 0)), Some(-0.5));
        assert_eq!(t1.power(&Quantity::l2(Subject::V, 3, 0)), Some(-1.5));
        assert_eq!(t1.power(&Quantity::l2(Subject::V, 0, 0)), None);
        assert_eq!(t1.power(&Quantity::l2(Subject::Z, 0, 0)), Some(-1.0));
        assert_eq!(t1.power(&Quantity::l2(Subject::Z, 1, 1)), Some(-2.5));
        assert_eq!(t1.power(&Quantity::l2(Subject::Z, 0, 2)), Some(-2.5));

        let t2 = theorem_table(TheoremId::Thm2Improved);
        assert_eq!(t2.power(&Quantity::l2(Subject::V, 0, 0)), Some(-0.25));
        assert_eq!(t2.power(&Quantity::l2(Subject::V, 3, 0)), Some(-1.75));
        assert_eq!(t2.power(&Quantity::l2(Subject::Z, 0, 0)), Some(-1.25));
        assert_eq!(t2.power(&Quantity::l2(Subject::Z, 2, 0)), Some(-2.25));
        assert_eq!(t2.power(&Quantity::l2(Subject::Z, 0, 1)), Some(-2.25));
        assert_eq!(t2.power(&Quantity::l2(Subject::Z, 0, 2)), Some(-2.75));

        let t3 = theorem_table(TheoremId::Thm2Faster);
        assert_eq!(t3.power(&Quantity::l2(Subject::V, 0, 0)), Some(-0.75));
        assert_eq!(t3.power(&Quantity::l2(Subject::Z, 0, 0)), Some(-1.75));
        assert_eq!(t3.power(&Quantity::l2(Subject::Z, 1, 1)), Some(-3.25));
        assert_eq!(t3.power(&Quantity::l2(Subject::Z, 0, 2)), Some(-3.25));
        assert!(t3.hypotheses.zero_mass && t3.hypotheses.l1_data);

        let l = theorem_table(TheoremId::Lemma21);
        let q = |k, j, n| Quantity::new(Subject::Profile, k, j, n);
        assert_eq!(l.power(&q(0, 0, NormKind::Linf)), Some(-0.5));
        assert_eq!(l.power(&q(0, 0, NormKind::L1)), Some(0.0));
        assert_eq!(l.power(&q(1, 0, NormKind::L2)), Some(-0.75));
        assert_eq!(l.power(&q(2, 1, NormKind::L2)), Some(-2.25));
        assert_eq!(l.entries.len(), 18);

        let e = theorem_table(TheoremId::Lemma22);
        assert!(matches!(
            e.expected(&Quantity::new(Subject::VHat, 0, 0, NormKind::L1)),
            Some(Expected::Exponential { .. })
        ));
    }

    #[test]
    fn theorem_ids_parse() {
        for id in TheoremId::ALL {
            assert_eq!(TheoremId::parse(id.as_str()).unwrap(), id);
        }
        assert!(TheoremId::parse("thm3").is_err());
    }

    #[test]
    fn report_verdicts() {
        let table = theorem_table(TheoremId::Thm2Improved);
        let mut series = BTreeMap::new();
        let qv = Quantity::l2(Subject::V, 0, 0);
        let qz = Quantity::l2(Subject::Z, 0, 0);
        let qx = Quantity::l2(Subject::V, 1, 0);
        series.insert(qv, sampled(|t| (1.0 + t).powf(-0.25)));
        series.insert(qz, sampled(|t| (1.0 + t).powf(-1.75)));
        series.insert(qx, sampled(|_| 0.0));
        let tol: Tolerances = [(qv, 0.05), (qz, 0.05)].into_iter().collect();
        let lines = decay_report(&series, &table, FitWindow::new(100.0, 1e4), &tol).unwrap();
        let by = |q| lines.iter().find(|l| l.quantity == q).unwrap();
        assert_eq!(by(qv).verdict, Verdict::Pass);
        assert_eq!(by(qz).verdict, Verdict::Fail);
        assert!((by(qz).fit.as_ref().unwrap().gap().unwrap() + 0.5).abs() < 1e-9);
        assert_eq!(by(qx).verdict, Verdict::Degenerate);
    }

    #[test]
    fn hypothesis_examples() {
        let grid = crate::grid::HalfLineGrid::new(100.0, 1000).unwrap();
        let params = HypothesisParams::default();
        // zero-mass, compactly supported data
        let v0 = grid.sample(|x| if (10.0..20.0).contains(&x) { (x - 15.0) * (1.0 - ((x - 15.0) / 5.0).powi(2)) } else { 0.0 });
        let z0 = grid.zeros();
        let flags = hypothesis_check(&v0, &z0, 1.0, 0.0, TheoremId::Thm2Faster, &params);
        assert!(flags.l1_data && flags.w0_integrable && flags.zero_mass && flags.u_plus_zero, "{flags:?}");
        assert!(flags.applies());
        assert_eq!(flags.strongest(), TheoremId::Thm2Faster);

        let flags = hypothesis_check(&v0, &z0, 1.0, 0.3, TheoremId::Thm2Faster, &params);
        assert!(!flags.applies());
        assert_eq!(flags.strongest(), TheoremId::Thm2Improved);

        // mass 0.1: the zero-mass flag fails and reports it
        let bump = grid.sample(|x| if (10.0..20.0).contains(&x) { 0.01 } else { 0.0 });
        let flags = hypothesis_check(&bump, &z0, 1.0, 0.0, TheoremId::Thm2Faster, &params);
        assert!(!flags.zero_mass && !flags.w0_integrable);
        assert!((flags.mass - 0.1).abs() < 1e-12);

        // slowly decaying data fails the L1 proxy
        let slow = grid.sample(|x| 1.0 / (1.0 + x).sqrt());
        assert!(!hypothesis_check(&slow, &z0, 1.0, 0.0, TheoremId::Thm2Improved, &params).l1_data);
    }
}
