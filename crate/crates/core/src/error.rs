//! Error type shared by every module of the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain ({domain})")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("vacuum: specific volume {v} <= 0 at x = {x}")]
    Vacuum { x: f64, v: f64 },

    #[error("velocity {u} left the admissible interval [{lo}, {hi}] at x = {x}")]
    Admissibility { x: f64, u: f64, lo: f64, hi: f64 },

    #[error("time step {dt} exceeds the CFL bound {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("invalid model: {0}")]
    Model(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("shape function has zero integral")]
    ZeroIntegral,

    #[error("support {support} exceeds the grid length {length}")]
    SupportExceedsGrid { support: f64, length: f64 },

    #[error("positivity lost in the implicit profile step at t = {t}")]
    Positivity { t: f64 },

    #[error("Newton iteration did not converge at t = {t} (residual {residual:e})")]
    Newton { t: f64, residual: f64 },

    #[error("truncation too short: tail value {tail:e} exceeds tolerance {tol:e}")]
    TailTolerance { tail: f64, tol: f64 },

    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("time span [{t_min}, {t_max}] is shorter than {decades} decades")]
    InsufficientSpan { t_min: f64, t_max: f64, decades: f64 },

    #[error("non-positive value {value:e} at t = {t} in a log-log fit")]
    NonPositive { t: f64, value: f64 },

    #[error("unsupported derivative order k = {k}, j = {j}")]
    DerivativeOrder { k: usize, j: usize },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("config: {0}")]
    Config(String),

    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at_time(self, t: f64) -> Self {
        Error::AtTime {
            t,
            source: Box::new(self),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
