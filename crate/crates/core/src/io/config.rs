//! Flat TOML run description.
//!
//! ```toml
//! task = "leaning"          # spectrum | leaning | bg | torus | wigner | semiclassical | verify
//! m1 = 16.0
//! m2 = 1.0
//! l1 = 2.718281828459045
//! l2 = 3.141592653589793
//! hbar = 1.0                # optional, default 1
//! preset = "segment"        # or `unitary`: four rows of [re, im, re, im, re, im, re, im]
//! roots = 2000              # spectral range: one of `roots`, `kappa_max`, `e_max`
//! out = "out"               # output directory
//! format = "csv"            # csv | json
//! threads = 0               # 0 = all available cores
//! ```
//!
//! Task parameters: `bins` (bg), `root_index`, `x_points`, `p_points`, `p_max` (wigner),
//! `phi1`, `branch_sheet`, `energy`, `u_max`, `u_points`, `p_points`, `p_max`, `delta` (semiclassical),
//! `verify_roots` (verify).

use crate::catalog::Preset;
use crate::graph::{unitary_tolerance, BoundaryCondition, TwoEdgeGraph};
use crate::scalar::{cx, Cx};
use nalgebra::Matrix4;
use serde::Deserialize;
use std::fmt;
use std::str::FromStr;

/// Failure while reading or executing a run description.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Compute(#[from] crate::error::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

/// Computation requested by a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Spectrum,
    Leaning,
    Bg,
    Torus,
    Wigner,
    Semiclassical,
    Verify,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::Spectrum,
        Task::Leaning,
        Task::Bg,
        Task::Torus,
        Task::Wigner,
        Task::Semiclassical,
        Task::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Leaning => "leaning",
            Task::Bg => "bg",
            Task::Torus => "torus",
            Task::Wigner => "wigner",
            Task::Semiclassical => "semiclassical",
            Task::Verify => "verify",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| ConfigError::Validation("task".into()))
    }
}

/// Table serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(ConfigError::Validation("format".into())),
        }
    }
}

/// Boundary condition as written in the configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum BcSpec {
    Preset(Preset),
    Unitary(Box<Matrix4<Cx<f64>>>),
}

/// Spectral window of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralRange {
    Roots(usize),
    KappaMax(f64),
    EnergyMax(f64),
}

/// Validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub graph: TwoEdgeGraph<f64>,
    pub bc: BcSpec,
    pub range: SpectralRange,
    pub bins: usize,
    pub root_index: usize,
    pub x_points: usize,
    pub p_points: usize,
    pub p_max: Option<f64>,
    pub phi1: f64,
    pub branch_sheet: usize,
    pub energy: f64,
    pub u_max: f64,
    pub u_points: usize,
    pub delta: f64,
    pub verify_roots: usize,
    pub out: String,
    pub format: OutputFormat,
    pub threads: usize,
}

impl RunConfig {
    pub fn boundary_condition(&self) -> Result<BoundaryCondition<f64>, ConfigError> {
        match &self.bc {
            BcSpec::Preset(p) => Ok(p.boundary_condition()),
            BcSpec::Unitary(u) => {
                BoundaryCondition::from_unitary(**u).map_err(|_| ConfigError::Validation("unitarity".into()))
            }
        }
    }

    pub fn preset(&self) -> Option<Preset> {
        match self.bc {
            BcSpec::Preset(p) => Some(p),
            BcSpec::Unitary(_) => None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    task: Option<String>,
    m1: Option<f64>,
    m2: Option<f64>,
    l1: Option<f64>,
    l2: Option<f64>,
    hbar: Option<f64>,
    preset: Option<String>,
    unitary: Option<Vec<Vec<f64>>>,
    roots: Option<usize>,
    kappa_max: Option<f64>,
    e_max: Option<f64>,
    bins: Option<usize>,
    root_index: Option<usize>,
    x_points: Option<usize>,
    p_points: Option<usize>,
    p_max: Option<f64>,
    phi1: Option<f64>,
    branch_sheet: Option<usize>,
    energy: Option<f64>,
    u_max: Option<f64>,
    u_points: Option<usize>,
    delta: Option<f64>,
    verify_roots: Option<usize>,
    out: Option<String>,
    format: Option<String>,
    threads: Option<usize>,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, column)
}

fn require(v: Option<f64>, name: &str) -> Result<f64, ConfigError> {
    match v {
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(ConfigError::Validation(name.into())),
    }
}

fn positive(v: f64, name: &str) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::Validation(name.into()))
    }
}

fn at_least(v: usize, min: usize, name: &str) -> Result<usize, ConfigError> {
    if v >= min {
        Ok(v)
    } else {
        Err(ConfigError::Validation(name.into()))
    }
}

fn parse_unitary(rows: &[Vec<f64>]) -> Result<Matrix4<Cx<f64>>, ConfigError> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 8) {
        return Err(ConfigError::Validation("unitary".into()));
    }
    let u = Matrix4::from_fn(|i, j| cx(rows[i][2 * j], rows[i][2 * j + 1]));
    let dev = (u.adjoint() * u - Matrix4::identity())
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    if !(dev <= unitary_tolerance::<f64>()) {
        return Err(ConfigError::Validation("unitarity".into()));
    }
    Ok(u)
}

/// Parses and validates a TOML run description.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_column(text, s.start)).unwrap_or((0, 0));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let task = raw.task.as_deref().unwrap_or("spectrum").parse()?;
    let m1 = require(raw.m1, "m1")?;
    let m2 = require(raw.m2, "m2")?;
    let l1 = require(raw.l1, "l1")?;
    let l2 = require(raw.l2, "l2")?;
    let hbar = positive(raw.hbar.unwrap_or(1.0), "hbar")?;
    let graph = TwoEdgeGraph::with_hbar(m1, m2, l1, l2, hbar).map_err(|_| ConfigError::Validation("graph".into()))?;
    let bc = match (raw.preset, raw.unitary) {
        (Some(p), None) => BcSpec::Preset(p.parse().map_err(|_| ConfigError::Validation("preset".into()))?),
        (None, Some(rows)) => BcSpec::Unitary(Box::new(parse_unitary(&rows)?)),
        (None, None) => BcSpec::Preset(Preset::Segment),
        (Some(_), Some(_)) => return Err(ConfigError::Validation("preset/unitary".into())),
    };
    let range = match (raw.roots, raw.kappa_max, raw.e_max) {
        (Some(n), None, None) => SpectralRange::Roots(at_least(n, 1, "roots")?),
        (None, Some(k), None) => SpectralRange::KappaMax(positive(k, "kappa_max")?),
        (None, None, Some(e)) => SpectralRange::EnergyMax(positive(e, "e_max")?),
        (None, None, None) => SpectralRange::Roots(200),
        _ => return Err(ConfigError::Validation("roots/kappa_max/e_max".into())),
    };
    let format = raw.format.as_deref().unwrap_or("csv").parse()?;
    let phi1 = raw.phi1.unwrap_or(std::f64::consts::FRAC_PI_2);
    if !phi1.is_finite() {
        return Err(ConfigError::Validation("phi1".into()));
    }
    let branch_sheet = raw.branch_sheet.unwrap_or(0);
    if branch_sheet > 1 {
        return Err(ConfigError::Validation("branch_sheet".into()));
    }
    let cfg = RunConfig {
        task,
        graph,
        bc,
        range,
        bins: at_least(raw.bins.unwrap_or(64), 1, "bins")?,
        root_index: at_least(raw.root_index.unwrap_or(1), 1, "root_index")?,
        x_points: at_least(raw.x_points.unwrap_or(201), 2, "x_points")?,
        p_points: at_least(raw.p_points.unwrap_or(201), 2, "p_points")?,
        p_max: raw.p_max.map(|p| positive(p, "p_max")).transpose()?,
        phi1,
        branch_sheet,
        energy: positive(raw.energy.unwrap_or(0.5), "energy")?,
        u_max: positive(raw.u_max.unwrap_or(3.0), "u_max")?,
        u_points: at_least(raw.u_points.unwrap_or(121), 2, "u_points")?,
        delta: positive(raw.delta.unwrap_or(1e-2), "delta")?,
        verify_roots: at_least(raw.verify_roots.unwrap_or(200), 1, "verify_roots")?,
        out: raw.out.unwrap_or_else(|| "out".into()),
        format,
        threads: raw.threads.unwrap_or(0),
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = "m1 = 16.0\nm2 = 1.0\nl1 = 2.718281828459045\nl2 = 3.141592653589793\n";

    #[test]
    fn reference_segment_config() {
        let cfg = parse_config(&format!("{REFERENCE}preset = \"segment\"\ntask = \"leaning\"\n")).unwrap();
        let (w1, w2) = cfg.graph.frequencies();
        assert!((w1 - 4.0 * std::f64::consts::E).abs() < 1e-14);
        assert!((w2 - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(cfg.graph.hbar(), 1.0);
        assert_eq!(cfg.format, OutputFormat::Csv);
        assert_eq!(cfg.task, Task::Leaning);
    }

    #[test]
    fn missing_mass_is_named() {
        let err = parse_config("m1 = 1.0\nl1 = 1.0\nl2 = 1.0\n").unwrap_err();
        assert_eq!(err, ConfigError::Validation("m2".into()));
    }

    #[test]
    fn non_unitary_matrix_is_rejected() {
        let rows = "unitary = [[2,0,0,0,0,0,0,0],[0,0,1,0,0,0,0,0],[0,0,0,0,1,0,0,0],[0,0,0,0,0,0,1,0]]\n";
        let err = parse_config(&format!("{REFERENCE}{rows}")).unwrap_err();
        assert_eq!(err, ConfigError::Validation("unitarity".into()));
    }

    #[test]
    fn explicit_identity_is_accepted() {
        let rows = "unitary = [[1,0,0,0,0,0,0,0],[0,0,1,0,0,0,0,0],[0,0,0,0,1,0,0,0],[0,0,0,0,0,0,1,0]]\n";
        let cfg = parse_config(&format!("{REFERENCE}{rows}")).unwrap();
        assert!(cfg.boundary_condition().unwrap().is_scale_free());
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_config("m1 = 1.0\nm2 = = 2\n").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_config("mass = 1.0\n"), Err(ConfigError::Parse { line: 1, .. })));
    }
}
