//! Run artifacts: CSV tables, log-log SVG plots and a JSON manifest.
//!
//! Floats are written as `{:.16e}` and nothing time-dependent is recorded,
//! so repeating a run reproduces every file byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::decay::{HypothesisFlags, ReportLine};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::perturbation::MONITOR_NAME;
use crate::pipeline::{verdict_counts, KernelScalingLine, Outcome, ProfileOutcome, SimulationOutcome};

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Snapshot indices spread evenly (hence log-spaced in time) over `0..n`.
fn field_indices(n: usize, count: usize) -> Vec<usize> {
    if n == 0 || count == 0 {
        return Vec::new();
    }
    if count >= n {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..count)
        .map(|i| ((i * (n - 1)) as f64 / (count - 1).max(1) as f64).round() as usize)
        .collect();
    idx.dedup();
    idx
}

/// Writes `(t, x, columns...)` for selected times, striding in space.
fn write_fields(path: &Path, header: &[&str], rows: &[(f64, Vec<&Field>)], max_points: usize) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for (t, fields) in rows {
        let grid = fields[0].grid();
        let stride = grid.cells().div_ceil(max_points.max(1));
        for j in (0..grid.cells()).step_by(stride) {
            let mut rec = vec![num(*t), num(grid.x(j))];
            rec.extend(fields.iter().map(|f| num(f.values()[j])));
            w.write_record(&rec)?;
        }
    }
    finish(w, path)
}

fn write_report(path: &Path, lines: &[ReportLine]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "quantity", "k", "j", "norm", "expected", "fitted", "gap", "r_squared", "tolerance", "verdict",
    ])?;
    for l in lines {
        let q = &l.quantity;
        let fit = l.fit.as_ref();
        w.write_record([
            q.subject.label().to_string(),
            q.k.to_string(),
            q.j.to_string(),
            q.norm.label().to_string(),
            num(l.expected),
            opt(fit.map(|f| f.exponent)),
            opt(fit.and_then(|f| f.gap())),
            opt(fit.map(|f| f.r_squared)),
            opt(fit.and_then(|f| f.tolerance)),
            l.verdict.label().to_string(),
        ])?;
    }
    finish(w, path)
}

/// `k, j, p, expected, fitted` for the kernel scaling table.
pub fn write_kernel_scaling(path: &Path, lines: &[KernelScalingLine]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["k", "j", "p", "expected", "fitted", "r_squared"])?;
    for l in lines {
        let p = if l.p.is_infinite() { "inf".to_string() } else { num(l.p) };
        w.write_record([
            l.k.to_string(),
            l.j.to_string(),
            p,
            num(l.expected),
            num(l.fit.exponent),
            num(l.fit.r_squared),
        ])?;
    }
    finish(w, path)
}

/// Log-log plot of `value` against `1 + t`, with a dashed guide of slope
/// `guide` through the last point.
pub fn loglog_svg(title: &str, series: &[(f64, f64)], guide: Option<f64>) -> String {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|&(t, v)| ((1.0 + t).log10(), v.log10()))
        .collect();
    let (w, h, m) = (640.0, 420.0, 50.0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-family="monospace" font-size="14" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    if pts.len() >= 2 {
        let (x0, x1) = bounds(pts.iter().map(|p| p.0));
        let (y0, y1) = bounds(pts.iter().map(|p| p.1));
        let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
        let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
        let _ = writeln!(
            svg,
            r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            w - 2.0 * m,
            h - 2.0 * m
        );
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        if let Some(slope) = guide {
            let (xe, ye) = pts[pts.len() - 1];
            let xs = x0.max(xe - 2.0);
            let ys = ye + slope * (xs - xe);
            let clip = |y: f64| y.clamp(y0, y1);
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-dasharray="6,4"/>"#,
                sx(xs),
                sy(clip(ys)),
                sx(xe),
                sy(clip(ye))
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-family="monospace" font-size="12" fill="crimson">slope {slope}</text>"#,
                w - m - 100.0,
                m + 16.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{m}" y="{}" font-family="monospace" font-size="11">log10(1+t) in [{x0:.2}, {x1:.2}], log10 value in [{y0:.2}, {y1:.2}]</text>"#,
            h - 15.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn slug(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisSummary {
    pub requested: String,
    pub applies: bool,
    pub strongest: String,
    pub l1_data: bool,
    pub w0_integrable: bool,
    pub mass: f64,
    pub zero_mass: bool,
    pub u_plus_zero: bool,
}

impl From<&HypothesisFlags> for HypothesisSummary {
    fn from(h: &HypothesisFlags) -> Self {
        Self {
            requested: h.requested.to_string(),
            applies: h.applies(),
            strongest: h.strongest().to_string(),
            l1_data: h.l1_data,
            w0_integrable: h.w0_integrable,
            mass: h.mass,
            zero_mass: h.zero_mass,
            u_plus_zero: h.u_plus_zero,
        }
    }
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub name: String,
    pub version: String,
    pub theorem: String,
    pub seed: u64,
    pub config_sha256: String,
    pub grid_length: f64,
    pub grid_cells: usize,
    pub delta0: Option<f64>,
    pub steps: Option<usize>,
    pub max_relative_mass_drift: Option<f64>,
    pub hypotheses: Option<HypothesisSummary>,
    pub verdicts: BTreeMap<String, usize>,
    pub passed: bool,
    /// File name to SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))
    }

    fn hashes(&self) -> Result<BTreeMap<String, String>> {
        self.files
            .iter()
            .map(|f| {
                let path = self.dir.join(f);
                let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                Ok((f.clone(), hex::encode(Sha256::digest(&bytes))))
            })
            .collect()
    }

    fn plots(&mut self, lines: &[ReportLine], series: &BTreeMap<crate::decay::Quantity, Vec<(f64, f64)>>) -> Result<()> {
        if !lines.is_empty() {
            let plots = self.dir.join("plots");
            fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
        }
        for l in lines.iter().filter(|l| l.fit.is_some()) {
            let Some(s) = series.get(&l.quantity) else { continue };
            let name = format!("plots/{}.svg", slug(&l.quantity.name()));
            self.text(&name, &loglog_svg(&l.quantity.name(), s, Some(l.expected)))?;
        }
        Ok(())
    }
}

fn verdict_map(lines: &[ReportLine]) -> BTreeMap<String, usize> {
    verdict_counts(lines)
        .into_iter()
        .map(|(v, n)| (v.label().to_string(), n))
        .collect()
}

fn write_simulation(out: &SimulationOutcome, dir: &Path) -> Result<Manifest> {
    let cfg = &out.config;
    let mut a = Artifacts::new(dir)?;
    a.text("config.toml", &cfg.to_toml())?;

    let idx = field_indices(out.profiles.len(), cfg.output.field_times);
    let rows: Vec<(f64, Vec<&Field>)> = idx
        .iter()
        .map(|&i| {
            let b = &out.profiles[i];
            (b.t, vec![&b.vbar, &b.ubar, &b.vhat, &b.uhat])
        })
        .collect();
    let path = a.path("profiles.csv");
    write_fields(&path, &["t", "x", "vbar", "ubar", "vhat", "uhat"], &rows, cfg.output.field_points)?;

    let rows: Vec<(f64, Vec<&Field>)> = idx
        .iter()
        .map(|&i| {
            let s = &out.trajectory.snapshots[i];
            (s.t, vec![&s.state.v, &s.state.u])
        })
        .collect();
    let path = a.path("trajectory.csv");
    write_fields(&path, &["t", "x", "v", "u"], &rows, cfg.output.field_points)?;

    let path = a.path("diagnostics.csv");
    let mut w = writer(&path)?;
    w.write_record(["t", "dt", "mass", "max_speed", "inflow"])?;
    for r in &out.trajectory.diagnostics {
        w.write_record([num(r.t), num(r.dt), num(r.mass), num(r.max_speed), num(r.inflow)])?;
    }
    finish(w, &path)?;

    let path = a.path("norms.csv");
    let mut w = writer(&path)?;
    w.write_record(["t", "norm_name", "value"])?;
    for (t, name, value) in out.norms.rows() {
        w.write_record([num(t), name, num(value)])?;
    }
    for &(t, m) in &out.zero_mass {
        w.write_record([num(t), "int(v-vbar-vhat)".to_string(), num(m)])?;
    }
    finish(w, &path)?;

    let path = a.path("decay_report.csv");
    write_report(&path, &out.report)?;

    if cfg.output.plots {
        a.plots(&out.report, &out.norms.series)?;
        a.text("plots/monitor.svg", &loglog_svg(MONITOR_NAME, &out.norms.monitor, None))?;
    }

    let manifest = Manifest {
        name: cfg.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        theorem: cfg.theorem.clone(),
        seed: cfg.seed,
        config_sha256: cfg.hash(),
        grid_length: out.prepared.grid.length(),
        grid_cells: out.prepared.grid.cells(),
        delta0: Some(out.prepared.delta0),
        steps: Some(out.trajectory.steps()),
        max_relative_mass_drift: Some(out.trajectory.max_relative_mass_drift()),
        hypotheses: Some((&out.hypotheses).into()),
        verdicts: verdict_map(&out.report),
        passed: out.passed(),
        files: a.hashes()?,
    };
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}

fn write_profile(out: &ProfileOutcome, dir: &Path) -> Result<Manifest> {
    let cfg = &out.config;
    let mut a = Artifacts::new(dir)?;
    a.text("config.toml", &cfg.to_toml())?;

    let idx = field_indices(out.bundles.len(), cfg.output.field_times);
    let rows: Vec<(f64, Vec<&Field>)> = idx
        .iter()
        .map(|&i| {
            let b = &out.bundles[i];
            (b.t, vec![&b.vbar, &b.ubar, &b.vhat, &b.uhat])
        })
        .collect();
    let path = a.path("profiles.csv");
    write_fields(&path, &["t", "x", "vbar", "ubar", "vhat", "uhat"], &rows, cfg.output.field_points)?;

    let path = a.path("norms.csv");
    let mut w = writer(&path)?;
    w.write_record(["t", "norm_name", "value"])?;
    for (q, s) in &out.series {
        for &(t, v) in s {
            w.write_record([num(t), q.name(), num(v)])?;
        }
    }
    finish(w, &path)?;

    let path = a.path("decay_report.csv");
    write_report(&path, &out.report)?;

    let path = a.path("correction_decay.csv");
    let mut w = writer(&path)?;
    w.write_record(["quantity", "t", "relative_error"])?;
    for c in &out.correction {
        w.write_record([c.quantity.name(), num(c.t), num(c.relative_error)])?;
    }
    finish(w, &path)?;

    if cfg.output.plots {
        a.plots(&out.report, &out.series)?;
    }

    let manifest = Manifest {
        name: cfg.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        theorem: cfg.theorem.clone(),
        seed: cfg.seed,
        config_sha256: cfg.hash(),
        grid_length: out.grid.length(),
        grid_cells: out.grid.cells(),
        delta0: cfg.profile.delta0,
        steps: None,
        max_relative_mass_drift: None,
        hypotheses: None,
        verdicts: verdict_map(&out.report),
        passed: out.passed(),
        files: a.hashes()?,
    };
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Writes every artifact of a run into `dir` and returns the manifest.
pub fn write_outcome(outcome: &Outcome, dir: &Path) -> Result<Manifest> {
    match outcome {
        Outcome::Simulation(s) => write_simulation(s, dir),
        Outcome::Profile(p) => write_profile(p, dir),
    }
    .map_err(|e| e.in_stage("output"))
}

/// Human-readable report table.
pub fn format_report(lines: &[ReportLine]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<26} {:>9} {:>9} {:>8} {:>6}  verdict",
        "quantity", "expected", "fitted", "R^2", "tol"
    );
    for l in lines {
        let fit = l.fit.as_ref();
        let cell = |x: Option<f64>, prec: usize| x.map_or("-".to_string(), |v| format!("{v:.prec$}"));
        let _ = writeln!(
            s,
            "{:<26} {:>9.4} {:>9} {:>8} {:>6}  {}",
            l.quantity.name(),
            l.expected,
            cell(fit.map(|f| f.exponent), 4),
            cell(fit.map(|f| f.r_squared), 4),
            cell(fit.and_then(|f| f.tolerance), 2),
            l.verdict.label()
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indices_are_spread() {
        assert_eq!(field_indices(10, 3), vec![0, 5, 9]);
        assert_eq!(field_indices(3, 8), vec![0, 1, 2]);
        assert!(field_indices(0, 3).is_empty());
    }

    #[test]
    fn svg_contains_guide() {
        let s: Vec<(f64, f64)> = (1..50).map(|i| (i as f64, (1.0 + i as f64).powf(-0.5))).collect();
        let svg = loglog_svg("a<b", &s, Some(-0.5));
        assert!(svg.starts_with("<svg") && svg.contains("polyline") && svg.contains("stroke-dasharray"));
        assert!(svg.contains("a&lt;b"));
        assert!(loglog_svg("empty", &[], None).ends_with("</svg>\n"));
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("d_x^1 d_t^0 V [L2]"), "d_x_1_d_t_0_V_L2");
    }
}
