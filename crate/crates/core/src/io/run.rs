//! Task dispatch: every task computes its outputs in memory, then [`write_artifacts`] stores them.

use super::config::{ConfigError, OutputFormat, RunConfig, SpectralRange, Task};
use crate::catalog::{bg_density, catalog_roots, cesaro_closed_form, leaning_extremes, zero_set_branches, Preset};
use crate::graph::{BoundaryCondition, TwoEdgeGraph};
use crate::observables::{
    bg_histogram, bin_masses, cesaro_mean_all, leaning_series, running_extremes, scan_eigensolutions, torus_sample,
    weyl_count, LeaningSeries,
};
use crate::special::integrate;
use crate::spectral::{
    build_eigensolutions, default_rank_tol, scan_first_roots, scan_roots, EigenSolution, IndicatorMode, ModeProfile,
    ScanOptions, SpectralScan,
};
use crate::wigner::{
    limit_coefficients, phase_aligned_distance, region_geometry, semiclassical_grid, subsequence_near, wigner_grid,
    wigner_normalization, WignerGrid,
};
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};

const SCHEMA_VERSION: u32 = 1;
const DENSITY_SAMPLES: usize = 512;

/// One table cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Count(usize),
}

/// Rectangular numeric output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Header line plus one line per row; reals carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Real(x) => format!("{x:.16e}"),
                    Cell::Count(n) => n.to_string(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Real(x) => json!(x),
                            Cell::Count(n) => json!(n),
                        })
                        .collect(),
                )
            })
            .collect();
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string(&doc).expect("tables serialize");
        s.push('\n');
        s
    }
}

/// File produced by a task, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Result of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// False only when a verification suite failed.
    pub success: bool,
}

struct Outputs {
    artifacts: Vec<Artifact>,
    success: bool,
    format: OutputFormat,
}

impl Outputs {
    fn new(format: OutputFormat) -> Self {
        Self {
            artifacts: Vec::new(),
            success: true,
            format,
        }
    }

    fn table(&mut self, stem: &str, table: &Table) {
        let (ext, contents) = match self.format {
            OutputFormat::Csv => ("csv", table.to_csv()),
            OutputFormat::Json => ("json", table.to_json()),
        };
        self.artifacts.push(Artifact {
            name: format!("{stem}.{ext}"),
            contents,
        });
    }

    fn json(&mut self, name: &str, mut doc: Value) {
        if let Value::Object(map) = &mut doc {
            map.insert("schema_version".into(), json!(SCHEMA_VERSION));
        }
        let mut contents = serde_json::to_string_pretty(&doc).expect("summaries serialize");
        contents.push('\n');
        self.artifacts.push(Artifact {
            name: name.into(),
            contents,
        });
    }
}

fn graph_json(g: &TwoEdgeGraph<f64>) -> Value {
    let (w1, w2) = g.frequencies();
    json!({
        "m1": g.m1(), "m2": g.m2(), "l1": g.l1(), "l2": g.l2(), "hbar": g.hbar(),
        "omega1": w1, "omega2": w2,
    })
}

fn bc_label(cfg: &RunConfig) -> String {
    cfg.preset().map(|p| p.name().to_string()).unwrap_or_else(|| "unitary".into())
}

fn mode_name(mode: IndicatorMode) -> &'static str {
    match mode {
        IndicatorMode::RealDeterminant => "real_determinant",
        IndicatorMode::SingularGap => "singular_gap",
    }
}

fn scan_range(
    g: &TwoEdgeGraph<f64>,
    bc: &BoundaryCondition<f64>,
    range: SpectralRange,
) -> Result<SpectralScan<f64>, ConfigError> {
    let opts = ScanOptions::default();
    Ok(match range {
        SpectralRange::Roots(n) => scan_first_roots(g, bc, n, &opts)?,
        SpectralRange::KappaMax(k) => scan_roots(g, bc, k, &opts)?,
        SpectralRange::EnergyMax(e) => scan_roots(g, bc, g.kappa_of_energy(e), &opts)?,
    })
}

fn require_preset(cfg: &RunConfig) -> Result<Preset, ConfigError> {
    cfg.preset().ok_or_else(|| ConfigError::Validation("preset".into()))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn grid_table(grid: &WignerGrid<f64>, first: &'static str) -> Table {
    let mut t = Table::new(&[first, "p", "w"]);
    for (i, &x) in grid.x_axis.iter().enumerate() {
        for (j, &p) in grid.p_axis.iter().enumerate() {
            t.push(vec![Cell::Real(x), Cell::Real(p), Cell::Real(grid.values[(i, j)])]);
        }
    }
    t
}

fn task_spectrum(cfg: &RunConfig, out: &mut Outputs) -> Result<(), ConfigError> {
    let g = cfg.graph;
    let scan = scan_range(&g, &cfg.boundary_condition()?, cfg.range)?;
    let mut t = Table::new(&["kappa", "energy", "residual", "multiplicity"]);
    for r in &scan.roots {
        t.push(vec![
            Cell::Real(r.kappa),
            Cell::Real(g.energy(r.kappa)),
            Cell::Real(r.residual),
            Cell::Count(r.multiplicity),
        ]);
    }
    out.table("roots", &t);
    let weyl = weyl_count(&scan, &g, g.energy(scan.kappa_max))?;
    out.json(
        "summary.json",
        json!({
            "task": "spectrum",
            "boundary_condition": bc_label(cfg),
            "graph": graph_json(&g),
            "roots": scan.roots.len(),
            "roots_with_multiplicity": scan.count_with_multiplicity(),
            "zero_modes": scan.zero_modes,
            "kappa_max": scan.kappa_max,
            "indicator": mode_name(scan.mode),
            "weyl": { "count": weyl.count, "asymptotic": weyl.asymptotic,
                      "deviation": weyl.count as f64 - weyl.asymptotic },
        }),
    );
    Ok(())
}

fn dense_tail_extremes(series: &LeaningSeries<f64>) -> (f64, f64) {
    let n = series.len();
    series.entries[n / 2..]
        .iter()
        .map(|e| e.leaning)
        .filter(|l| 1.0 - l.abs() > 1e-8)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| (lo.min(l), hi.max(l)))
}

fn task_leaning(cfg: &RunConfig, out: &mut Outputs) -> Result<(), ConfigError> {
    let g = cfg.graph;
    let bc = cfg.boundary_condition()?;
    let scan = scan_range(&g, &bc, cfg.range)?;
    let series = leaning_series(&g, &bc, &scan, &bc_label(cfg), default_rank_tol())?;
    let mut t = Table::new(&["kappa", "leaning"]);
    for e in &series.entries {
        t.push(vec![Cell::Real(e.kappa), Cell::Real(e.leaning)]);
    }
    out.table("leaning", &t);
    let cesaro = cesaro_mean_all(&series)?;
    let (tail_min, tail_max) = running_extremes(&series)?;
    let (dense_min, dense_max) = dense_tail_extremes(&series);
    let limit = cesaro_closed_form(&g);
    let mut doc = json!({
        "task": "leaning",
        "boundary_condition": bc_label(cfg),
        "graph": graph_json(&g),
        "eigenfunctions": series.len(),
        "cesaro": cesaro,
        "tail_min": tail_min,
        "tail_max": tail_max,
        "dense_tail_min": if dense_min.is_finite() { json!(dense_min) } else { Value::Null },
        "dense_tail_max": if dense_max.is_finite() { json!(dense_max) } else { Value::Null },
        "closed_form": { "cesaro": limit },
        "deviation": { "cesaro": cesaro - limit },
    });
    if let Some(p) = cfg.preset() {
        let (lo, hi) = leaning_extremes(p, &g);
        doc["closed_form"]["dense_min"] = json!(lo);
        doc["closed_form"]["dense_max"] = json!(hi);
        if dense_min.is_finite() {
            doc["deviation"]["dense_min"] = json!(dense_min - lo);
            doc["deviation"]["dense_max"] = json!(dense_max - hi);
        }
    }
    out.json("summary.json", doc);
    Ok(())
}

fn task_bg(cfg: &RunConfig, out: &mut Outputs) -> Result<(), ConfigError> {
    let preset = require_preset(cfg)?;
    let g = cfg.graph;
    let scan = scan_range(&g, &preset.boundary_condition(), cfg.range)?;
    let sample = torus_sample(&scan, &g);
    let hist = bg_histogram(&sample, cfg.bins);
    let density = bg_density(preset, &g);
    let masses = bin_masses(&density, cfg.bins);
    let width = std::f64::consts::TAU / cfg.bins as f64;
    let total = hist.total.max(1) as f64;
    let mut t = Table::new(&["bin_lo", "bin_hi", "count", "empirical", "analytic"]);
    let mut l1 = 0.0;
    for (b, (&c, &m)) in hist.counts.iter().zip(&masses).enumerate() {
        let emp = c as f64 / total;
        l1 += (emp - m).abs();
        t.push(vec![
            Cell::Real(width * b as f64),
            Cell::Real(width * (b + 1) as f64),
            Cell::Count(c),
            Cell::Real(emp),
            Cell::Real(m),
        ]);
    }
    out.table("hist", &t);
    let mut d = Table::new(&["phi1", "density"]);
    for i in 0..DENSITY_SAMPLES {
        let phi = std::f64::consts::TAU * (i as f64 + 0.5) / DENSITY_SAMPLES as f64;
        d.push(vec![Cell::Real(phi), Cell::Real(density.density(phi))]);
    }
    out.table("density", &d);
    let atoms: Vec<Value> = density
        .atoms()
        .into_iter()
        .map(|(x, m)| json!({ "phi1": x, "mass": m }))
        .collect();
    out.json(
        "summary.json",
        json!({
            "task": "bg",
            "boundary_condition": preset.name(),
            "graph": graph_json(&g),
            "points": hist.total,
            "bins": cfg.bins,
            "l1_distance": l1,
            "atoms": atoms,
        }),
    );
    Ok(())
}

fn task_torus(cfg: &RunConfig, out: &mut Outputs) -> Result<(), ConfigError> {
    let g = cfg.graph;
    let scan = scan_range(&g, &cfg.boundary_condition()?, cfg.range)?;
    let sample = torus_sample(&scan, &g);
    let mut t = Table::new(&["phi1", "phi2"]);
    for &(a, b) in &sample.points {
        t.push(vec![Cell::Real(a), Cell::Real(b)]);
    }
    out.table("points", &t);
    Ok(())
}

fn task_wigner(cfg: &RunConfig, out: &mut Outputs) -> Result<(), ConfigError> {
    let g = cfg.graph;
    let bc = cfg.boundary_condition()?;
    let scan = scan_first_roots(&g, &bc, cfg.root_index, &ScanOptions::default())?;
    let sols: Vec<EigenSolution<f64>> = scan_eigensolutions(&g, &bc, &scan, default_rank_tol())?
        .into_iter()
        .filter(|s| s.profile() == ModeProfile::PlaneWave)
        .collect();
    let sol = sols
        .get(cfg.root_index - 1)
        .ok_or_else(|| ConfigError::Validation("root_index".into()))?;
    let (k1, k2) = sol.wavenumbers();
    let p_max = cfg
        .p_max
        .unwrap_or_else(|| g.hbar() * (k1.max(k2) + 20.0 / g.l1().min(g.l2())));
    let x_axis = linspace(-g.l1(), g.l2(), cfg.x_points);
    let p_axis = linspace(-p_max, p_max, cfg.p_points);
    let grid = wigner_grid(sol, &x_axis, &p_axis)?;
    out.table("wigner", &grid_table(&grid, "x"));
    let norm = wigner_normalization(sol, &region_geometry(&g))?;
    out.json(
        "summary.json",
        json!({
            "task": "wigner",
            "boundary_condition": bc_label(cfg),
            "graph": graph_json(&g),
            "root_index": cfg.root_index,
            "kappa": sol.kappa(),
            "energy": sol.energy(),
            "leaning": sol.leaning(),
            "imag_residue": grid.imag_residue,
            "normalization": norm,
            "deviation": { "normalization": norm - 1.0 },
        }),
    );
    Ok(())
}

fn task_semiclassical(cfg: &RunConfig, out: &mut Outputs) -> Result<(), ConfigError> {
    if require_preset(cfg)? != Preset::Segment {
        return Err(ConfigError::Validation("preset".into()));
    }
    let g = cfg.graph;
    let branches = zero_set_branches(Preset::Segment, &g)?;
    let phi1 = crate::scalar::wrap_angle(cfg.phi1);
    let phi2 = *branches[0]
        .phi2_of(phi1)
        .get(cfg.branch_sheet)
        .ok_or_else(|| ConfigError::Validation("branch_sheet".into()))?;
    let pt = limit_coefficients(&g, phi1, phi2, cfg.energy)?;
    let u_axis = linspace(-cfg.u_max, cfg.u_max, cfg.u_points);
    let p_max = cfg.p_max.unwrap_or(2.0 * pt.p1.max(pt.p2) + 2.0);
    let p_axis = linspace(-p_max, p_max, cfg.p_points);
    let grid = semiclassical_grid(&pt, &u_axis, &p_axis);
    out.table("semiclassical", &grid_table(&grid, "u"));

    let bc = Preset::Segment.boundary_condition();
    let scan = scan_range(&g, &bc, cfg.range)?;
    let near = subsequence_near(&scan, &g, (phi1, phi2), cfg.delta);
    let mut t = Table::new(&["kappa", "torus_distance", "coefficient_gap"]);
    for (root, dist) in &near {
        for s in build_eigensolutions(&g, &bc, root, default_rank_tol())? {
            t.push(vec![
                Cell::Real(root.kappa),
                Cell::Real(*dist),
                Cell::Real(phase_aligned_distance(s.coefficients(), &pt.coeffs)),
            ]);
        }
    }
    out.table("subsequence", &t);
    let coeffs: Vec<[f64; 2]> = pt.coeffs.iter().map(|z| [z.re, z.im]).collect();
    out.json(
        "summary.json",
        json!({
            "task": "semiclassical",
            "boundary_condition": "segment",
            "graph": graph_json(&g),
            "phi1": phi1,
            "phi2": phi2,
            "energy": cfg.energy,
            "momenta": [pt.p1, pt.p2],
            "limit_coefficients": coeffs,
            "delta": cfg.delta,
            "subsequence_roots": near.len(),
        }),
    );
    Ok(())
}

struct Check {
    suite: &'static str,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// `|int |psi|^2 - 1|` by independent quadrature of the eigenfunction values.
fn quadrature_norm_error(s: &EigenSolution<f64>) -> Result<f64, ConfigError> {
    let g = s.graph();
    let (k1, k2) = s.wavenumbers();
    let dens = |x: f64| s.evaluate(x).map(|z| z.norm_sqr()).unwrap_or(f64::NAN);
    let n1 = (g.l1() * k1).ceil() as usize + 4;
    let n2 = (g.l2() * k2).ceil() as usize + 4;
    let left = integrate(dens, -g.l1(), 0.0, n1);
    let right = integrate(dens, 0.0, g.l2(), n2);
    let total = left + right;
    if !total.is_finite() {
        return Err(ConfigError::VerifyFailed("eigenfunction evaluation".into()));
    }
    Ok((total - 1.0).abs())
}

fn verify_preset(g: &TwoEdgeGraph<f64>, preset: Option<Preset>, bc: &BoundaryCondition<f64>, n: usize) -> Result<Vec<Check>, ConfigError> {
    let scan = scan_first_roots(g, bc, n, &ScanOptions::default())?;
    let sols = scan_eigensolutions(g, bc, &scan, default_rank_tol())?;
    let mut checks = Vec::new();

    let (mut orth, mut dom, mut norm, mut lean) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for s in &sols {
        let t = s.trace();
        orth = orth.max(t.orthogonality().norm());
        dom = dom.max(bc.domain_residual(&t));
        norm = norm.max(quadrature_norm_error(s)?);
        lean = lean.max(s.leaning().abs() - 1.0);
    }
    checks.push(Check { suite: "boundary_orthogonality", value: orth, tolerance: 1e-8 });
    checks.push(Check { suite: "domain_membership", value: dom, tolerance: 1e-8 });
    checks.push(Check { suite: "normalization", value: norm, tolerance: 1e-9 });
    checks.push(Check { suite: "leaning_bounds", value: lean.max(0.0), tolerance: 1e-12 });

    let weyl = weyl_count(&scan, g, g.energy(scan.kappa_max))?;
    checks.push(Check {
        suite: "weyl_remainder",
        value: (weyl.count as f64 - weyl.asymptotic).abs(),
        tolerance: 4.0,
    });

    if let Some(p) = preset {
        let cat: Vec<f64> = catalog_roots(p, g, scan.kappa_max).iter().map(|r| r.kappa).collect();
        let mut cat = cat;
        cat.sort_by(|a, b| a.total_cmp(b));
        let eng: Vec<f64> = scan
            .roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.kappa, r.multiplicity))
            .collect();
        let dev = if eng.len() == cat.len() {
            eng.iter().zip(&cat).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        checks.push(Check { suite: "catalog_roots", value: dev, tolerance: 1e-9 });
        checks.push(Check {
            suite: "scale_free",
            value: if bc.is_scale_free() { 0.0 } else { 1.0 },
            tolerance: 0.0,
        });
    }
    Ok(checks)
}

fn task_verify(cfg: &RunConfig, out: &mut Outputs) -> Result<(), ConfigError> {
    let g = cfg.graph;
    let mut targets: Vec<(String, Option<Preset>, BoundaryCondition<f64>)> = Preset::ALL
        .into_iter()
        .map(|p| (p.name().to_string(), Some(p), p.boundary_condition()))
        .collect();
    if cfg.preset().is_none() {
        targets.push(("unitary".into(), None, cfg.boundary_condition()?));
    }
    let mut suites = Vec::new();
    let mut all = true;
    for (label, preset, bc) in &targets {
        for c in verify_preset(&g, *preset, bc, cfg.verify_roots)? {
            all &= c.passed();
            suites.push(json!({
                "boundary_condition": label,
                "suite": c.suite,
                "passed": c.passed(),
                "value": if c.value.is_finite() { json!(c.value) } else { Value::Null },
                "tolerance": c.tolerance,
            }));
        }
    }
    out.success = all;
    out.json(
        "report.json",
        json!({
            "task": "verify",
            "graph": graph_json(&g),
            "roots_per_condition": cfg.verify_roots,
            "all_passed": all,
            "suites": suites,
        }),
    );
    Ok(())
}

/// Runs the task on the current rayon pool and returns its outputs without touching the filesystem.
pub fn compute(cfg: &RunConfig) -> Result<(Vec<Artifact>, bool), ConfigError> {
    let mut out = Outputs::new(cfg.format);
    match cfg.task {
        Task::Spectrum => task_spectrum(cfg, &mut out)?,
        Task::Leaning => task_leaning(cfg, &mut out)?,
        Task::Bg => task_bg(cfg, &mut out)?,
        Task::Torus => task_torus(cfg, &mut out)?,
        Task::Wigner => task_wigner(cfg, &mut out)?,
        Task::Semiclassical => task_semiclassical(cfg, &mut out)?,
        Task::Verify => task_verify(cfg, &mut out)?,
    }
    Ok((out.artifacts, out.success))
}

/// Writes every artifact into `dir`; on failure no artifact of this call is left behind.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, ConfigError> {
    let io = |e: std::io::Error| ConfigError::Io(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    let mut staged = Vec::new();
    let result = (|| {
        for a in artifacts {
            let tmp = dir.join(format!(".{}.partial", a.name));
            staged.push(tmp.clone());
            fs::write(&tmp, &a.contents).map_err(io)?;
        }
        let mut done = Vec::new();
        for (a, tmp) in artifacts.iter().zip(&staged) {
            let dest = dir.join(&a.name);
            fs::rename(tmp, &dest).map_err(io)?;
            done.push(dest);
        }
        Ok(done)
    })();
    if result.is_err() {
        for (a, tmp) in artifacts.iter().zip(&staged) {
            let _ = fs::remove_file(tmp);
            let _ = fs::remove_file(dir.join(&a.name));
        }
    }
    result
}

/// Computes the task on a pool of `cfg.threads` workers and writes its outputs to `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, ConfigError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| ConfigError::Io(e.to_string()))?;
    let (artifacts, success) = pool.install(|| compute(cfg))?;
    let files = write_artifacts(Path::new(&cfg.out), &artifacts)?;
    Ok(RunOutcome { files, success })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_one_header_and_full_precision() {
        let mut t = Table::new(&["a", "n"]);
        t.push(vec![Cell::Real(0.1), Cell::Count(2)]);
        assert_eq!(t.to_csv(), "a,n\n1.0000000000000001e-1,2\n");
        let v: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["rows"][0][1], 2);
    }

    #[test]
    fn failed_write_leaves_nothing_behind() {
        let dir = tempfile::tempdir().unwrap();
        let arts = vec![
            Artifact { name: "ok.csv".into(), contents: "x\n".into() },
            Artifact { name: "missing/bad.csv".into(), contents: "y\n".into() },
        ];
        assert!(write_artifacts(dir.path(), &arts).is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
