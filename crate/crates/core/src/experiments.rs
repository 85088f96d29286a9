//! Configuration loading and CSV experiment runs.
//!
//! A config is a TOML document with `[scenario]`, `[power]`, `[solver]` and
//! `[experiment]` tables; every key except `scenario.T_s` has a default.
//! Sweep points run on a rayon pool and results are collected in input
//! order, so identical configs give byte-identical data files. Only the
//! run summary (wall times) varies between runs.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcd::{bcd_solve, SchemeKind, SolveReport};
use crate::error::{Error, Result};
use crate::scenario::{baseline_trajectory, Point, ScenarioConfig, Trajectory};

pub const TRACE_CSV: &str = "trace.csv";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const SWEEP_TIME_CSV: &str = "sweep_time.csv";
pub const SWEEP_POWER_CSV: &str = "sweep_power.csv";
pub const SUMMARY_CSV: &str = "summary.csv";

/// Scheme label used for the unoptimized baseline export.
pub const BASELINE_LABEL: &str = "BASELINE";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Solve,
    Trace,
    TrajectoryExport,
    SweepTime,
    SweepPower,
}

impl ExperimentKind {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "solve" => Self::Solve,
            "trace" => Self::Trace,
            "trajectory_export" => Self::TrajectoryExport,
            "sweep_time" => Self::SweepTime,
            "sweep_power" => Self::SweepPower,
            other => return Err(Error::InvalidConfig(format!("unknown experiment kind {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub schemes: Vec<SchemeKind>,
    /// Horizons in seconds, or average powers in dBm for power sweeps.
    pub sweep_values: Vec<f64>,
    /// Transmitter shares of the average power budget.
    pub splits: Vec<f64>,
    pub output_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("experiment.schemes is empty".into()));
        }
        for (name, v) in [("sweep_values", &self.sweep_values), ("splits", &self.splits)] {
            if v.is_empty() {
                return Err(Error::InvalidConfig(format!("experiment.{name} is empty")));
            }
            if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidConfig(format!(
                    "experiment.{name} must be finite and sorted ascending"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    scenario: ScenarioSection,
    #[serde(default)]
    power: PowerSection,
    #[serde(default)]
    solver: SolverSection,
    #[serde(default)]
    experiment: ExperimentSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    #[serde(rename = "N")]
    n: Option<usize>,
    #[serde(rename = "T_s")]
    t_s: Option<f64>,
    #[serde(rename = "H_m")]
    h_m: Option<f64>,
    #[serde(rename = "V_mps")]
    v_mps: Option<f64>,
    #[serde(rename = "gamma0_dB")]
    gamma0_db: Option<f64>,
    bob_xy: Option<Point>,
    eve_xy: Option<Point>,
    start_xy: Option<Point>,
    end_xy: Option<Point>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerSection {
    #[serde(rename = "P_ave_dBm")]
    p_ave_dbm: Option<f64>,
    lambda: Option<f64>,
    peak_factor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    epsilon: Option<f64>,
    max_outer_iters: Option<usize>,
    bisection_tol: Option<f64>,
    inner_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    kind: Option<String>,
    schemes: Option<Vec<String>>,
    sweep_values: Option<Vec<f64>>,
    splits: Option<Vec<f64>>,
    output_dir: Option<PathBuf>,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Parses a config document; unspecified keys take the reference values.
pub fn load_config(text: &str) -> Result<(ScenarioConfig, ExperimentSpec)> {
    load_config_as(text, None)
}

/// Like [`load_config`], with `experiment.kind` replaced by `kind` when
/// given; sweep defaults follow the effective kind.
pub fn load_config_as(text: &str, kind: Option<ExperimentKind>) -> Result<(ScenarioConfig, ExperimentSpec)> {
    let doc: Document = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let s = doc.scenario;
    let horizon = s
        .t_s
        .ok_or_else(|| Error::InvalidConfig("missing required key scenario.T_s".into()))?;

    let mut cfg = ScenarioConfig::table1(horizon);
    cfg.n_slots = s.n.unwrap_or(cfg.n_slots);
    cfg.altitude_m = s.h_m.unwrap_or(cfg.altitude_m);
    cfg.speed_mps = s.v_mps.unwrap_or(cfg.speed_mps);
    cfg.gamma0 = s.gamma0_db.map(db_to_linear).unwrap_or(cfg.gamma0);
    cfg.bob = s.bob_xy.unwrap_or(cfg.bob);
    cfg.eve = s.eve_xy.unwrap_or(cfg.eve);
    cfg.start = s.start_xy.unwrap_or(cfg.start);
    cfg.end = s.end_xy.unwrap_or(cfg.end);

    let p = doc.power;
    cfg.budgets.p_ave_w = p.p_ave_dbm.map(dbm_to_watts).unwrap_or(cfg.budgets.p_ave_w);
    cfg.budgets.split = p.lambda.unwrap_or(cfg.budgets.split);
    cfg.budgets.peak_factor = p.peak_factor.unwrap_or(cfg.budgets.peak_factor);

    let t = doc.solver;
    cfg.solver.epsilon = t.epsilon.unwrap_or(cfg.solver.epsilon);
    cfg.solver.max_outer_iters = t.max_outer_iters.unwrap_or(cfg.solver.max_outer_iters);
    cfg.solver.bisection_tol = t.bisection_tol.unwrap_or(cfg.solver.bisection_tol);
    cfg.solver.inner_tol = t.inner_tol.unwrap_or(cfg.solver.inner_tol);
    cfg.validate()?;

    let e = doc.experiment;
    let kind = match kind {
        Some(k) => k,
        None => ExperimentKind::parse(e.kind.as_deref().unwrap_or("solve"))?,
    };
    let schemes = match e.schemes {
        Some(names) => names.iter().map(|n| n.parse()).collect::<Result<_>>()?,
        None => vec![SchemeKind::Jtdora],
    };
    let spec = ExperimentSpec {
        kind,
        schemes,
        sweep_values: e.sweep_values.unwrap_or_else(|| default_sweep(kind, &cfg)),
        splits: e.splits.unwrap_or_else(|| vec![cfg.budgets.split]),
        output_dir: e.output_dir.unwrap_or_else(|| PathBuf::from("out")),
    };
    spec.validate()?;
    Ok((cfg, spec))
}

/// Reads and parses a config file, optionally overriding the kind.
pub fn load_config_file(path: &Path, kind: Option<ExperimentKind>) -> Result<(ScenarioConfig, ExperimentSpec)> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    load_config_as(&text, kind)
}

fn default_sweep(kind: ExperimentKind, cfg: &ScenarioConfig) -> Vec<f64> {
    match kind {
        ExperimentKind::Solve | ExperimentKind::TrajectoryExport => vec![cfg.horizon_s],
        ExperimentKind::Trace => vec![110.0, 130.0, 150.0],
        ExperimentKind::SweepTime => (0..=6).map(|i| 100.0 + 10.0 * i as f64).collect(),
        ExperimentKind::SweepPower => (0..=10).map(|i| -10.0 + 2.0 * i as f64).collect(),
    }
}

#[derive(Debug, Serialize)]
struct TraceRow {
    scheme: String,
    #[serde(rename = "T_s")]
    t_s: f64,
    iteration: Option<usize>,
    asr_bpshz: Option<f64>,
    error: String,
}

#[derive(Debug, Serialize)]
struct TrajectoryRow {
    scheme: String,
    #[serde(rename = "T_s")]
    t_s: f64,
    slot: Option<usize>,
    x_m: Option<f64>,
    y_m: Option<f64>,
    error: String,
}

#[derive(Debug, Serialize)]
struct SweepTimeRow {
    scheme: String,
    #[serde(rename = "T_s")]
    t_s: f64,
    asr_bpshz: Option<f64>,
    error: String,
}

#[derive(Debug, Serialize)]
struct SweepPowerRow {
    scheme: String,
    lambda: f64,
    #[serde(rename = "P_ave_dBm")]
    p_ave_dbm: f64,
    asr_bpshz: Option<f64>,
    error: String,
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    scheme: String,
    #[serde(rename = "T_s")]
    t_s: f64,
    lambda: f64,
    #[serde(rename = "P_ave_dBm")]
    p_ave_dbm: f64,
    iterations: Option<usize>,
    converged: Option<bool>,
    wall_time_s: Option<f64>,
    asr_bpshz: Option<f64>,
    error: String,
}

/// One solve of a sweep.
#[derive(Debug, Clone)]
pub struct SolvePoint {
    pub scheme: SchemeKind,
    pub cfg: ScenarioConfig,
    pub result: std::result::Result<SolveReport, Error>,
}

impl SolvePoint {
    pub fn asr(&self) -> Option<f64> {
        self.result.as_ref().ok().map(SolveReport::final_asr)
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub points: Vec<SolvePoint>,
    pub files: Vec<PathBuf>,
    /// Human-readable notes, e.g. a power sweep that is not monotone.
    pub warnings: Vec<String>,
}

impl ExperimentOutcome {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.result.is_err()).count()
    }
}

/// Runs every (config, scheme) pair on the rayon pool, preserving order.
pub fn solve_all(jobs: Vec<(ScenarioConfig, SchemeKind)>) -> Vec<SolvePoint> {
    jobs.into_par_iter()
        .map(|(cfg, scheme)| SolvePoint {
            result: bcd_solve(&cfg, scheme),
            scheme,
            cfg,
        })
        .collect()
}

fn with_horizon(cfg: &ScenarioConfig, t: f64) -> ScenarioConfig {
    ScenarioConfig {
        horizon_s: t,
        ..cfg.clone()
    }
}

/// Runs the experiment and writes its CSV files into `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec, cfg: &ScenarioConfig) -> Result<ExperimentOutcome> {
    spec.validate()?;
    fs::create_dir_all(&spec.output_dir).map_err(|e| io_err(&spec.output_dir, e))?;
    let dir = &spec.output_dir;
    let mut files = Vec::new();
    let mut warnings = Vec::new();

    let points = match spec.kind {
        ExperimentKind::Solve | ExperimentKind::Trace | ExperimentKind::TrajectoryExport => {
            let horizons = match spec.kind {
                ExperimentKind::Solve => vec![cfg.horizon_s],
                _ => spec.sweep_values.clone(),
            };
            let points = solve_all(
                horizons
                    .iter()
                    .flat_map(|t| spec.schemes.iter().map(move |k| (with_horizon(cfg, *t), *k)))
                    .collect(),
            );
            if spec.kind != ExperimentKind::TrajectoryExport {
                files.push(write_csv(&dir.join(TRACE_CSV), trace_rows(&points))?);
            }
            if spec.kind != ExperimentKind::Trace {
                files.push(write_csv(&dir.join(TRAJECTORY_CSV), trajectory_rows(&points))?);
            }
            points
        }
        ExperimentKind::SweepTime => {
            let points = solve_all(
                spec.sweep_values
                    .iter()
                    .flat_map(|t| spec.schemes.iter().map(move |k| (with_horizon(cfg, *t), *k)))
                    .collect(),
            );
            let rows = points.iter().map(|p| SweepTimeRow {
                scheme: p.scheme.to_string(),
                t_s: p.cfg.horizon_s,
                asr_bpshz: p.asr(),
                error: error_text(&p.result),
            });
            files.push(write_csv(&dir.join(SWEEP_TIME_CSV), rows)?);
            points
        }
        ExperimentKind::SweepPower => {
            let mut jobs = Vec::new();
            for split in &spec.splits {
                for dbm in &spec.sweep_values {
                    for k in &spec.schemes {
                        let mut c = cfg.clone();
                        c.budgets.split = *split;
                        c.budgets.p_ave_w = dbm_to_watts(*dbm);
                        jobs.push((c, *k));
                    }
                }
            }
            let points = solve_all(jobs);
            warnings.extend(power_sweep_warnings(&points));
            let rows = points.iter().map(|p| SweepPowerRow {
                scheme: p.scheme.to_string(),
                lambda: p.cfg.budgets.split,
                p_ave_dbm: watts_to_dbm(p.cfg.budgets.p_ave_w),
                asr_bpshz: p.asr(),
                error: error_text(&p.result),
            });
            files.push(write_csv(&dir.join(SWEEP_POWER_CSV), rows)?);
            points
        }
    };

    let summary = points.iter().map(|p| {
        let r = p.result.as_ref().ok();
        SummaryRow {
            scheme: p.scheme.to_string(),
            t_s: p.cfg.horizon_s,
            lambda: p.cfg.budgets.split,
            p_ave_dbm: watts_to_dbm(p.cfg.budgets.p_ave_w),
            iterations: r.map(|r| r.iterations),
            converged: r.map(|r| r.converged),
            wall_time_s: r.map(|r| r.wall_time_s),
            asr_bpshz: p.asr(),
            error: error_text(&p.result),
        }
    });
    files.push(write_csv(&dir.join(SUMMARY_CSV), summary)?);

    Ok(ExperimentOutcome {
        points,
        files,
        warnings,
    })
}

/// Writes the baseline trajectory of every horizon in `horizons`.
pub fn export_baseline(cfg: &ScenarioConfig, horizons: &[f64], dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut rows = Vec::new();
    for t in horizons {
        let c = with_horizon(cfg, *t);
        match c.validate().and_then(|_| baseline_trajectory(&c)) {
            Ok(traj) => rows.extend(waypoint_rows(BASELINE_LABEL, *t, &traj)),
            Err(e) => rows.push(failed_trajectory_row(BASELINE_LABEL, *t, &e)),
        }
    }
    write_csv(&dir.join(TRAJECTORY_CSV), rows)
}

/// Reads back a trajectory CSV as `(scheme, T_s, trajectory)` groups in file
/// order; rows with an error are skipped.
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<(String, f64, Trajectory)>> {
    #[derive(Deserialize)]
    struct Row {
        scheme: String,
        #[serde(rename = "T_s")]
        t_s: f64,
        x_m: Option<f64>,
        y_m: Option<f64>,
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let mut groups: Vec<(String, f64, Trajectory)> = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| io_err(path, e))?;
        let (Some(x), Some(y)) = (row.x_m, row.y_m) else { continue };
        match groups.last_mut() {
            Some((s, t, traj)) if *s == row.scheme && *t == row.t_s => traj.waypoints.push(Point::new(x, y)),
            _ => groups.push((row.scheme, row.t_s, Trajectory::new(vec![Point::new(x, y)]))),
        }
    }
    Ok(groups)
}

fn trace_rows(points: &[SolvePoint]) -> Vec<TraceRow> {
    let mut rows = Vec::new();
    for p in points {
        let scheme = p.scheme.to_string();
        match &p.result {
            Ok(r) => rows.extend(r.asr_trace.iter().enumerate().map(|(i, v)| TraceRow {
                scheme: scheme.clone(),
                t_s: p.cfg.horizon_s,
                iteration: Some(i),
                asr_bpshz: Some(*v),
                error: String::new(),
            })),
            Err(e) => rows.push(TraceRow {
                scheme,
                t_s: p.cfg.horizon_s,
                iteration: None,
                asr_bpshz: None,
                error: e.to_string(),
            }),
        }
    }
    rows
}

fn trajectory_rows(points: &[SolvePoint]) -> Vec<TrajectoryRow> {
    let mut rows = Vec::new();
    for p in points {
        match &p.result {
            Ok(r) => rows.extend(waypoint_rows(p.scheme.name(), p.cfg.horizon_s, &r.final_trajectory)),
            Err(e) => rows.push(failed_trajectory_row(p.scheme.name(), p.cfg.horizon_s, e)),
        }
    }
    rows
}

fn waypoint_rows<'a>(scheme: &'a str, t_s: f64, traj: &'a Trajectory) -> impl Iterator<Item = TrajectoryRow> + 'a {
    traj.waypoints.iter().enumerate().map(move |(i, w)| TrajectoryRow {
        scheme: scheme.to_string(),
        t_s,
        slot: Some(i + 1),
        x_m: Some(w.x),
        y_m: Some(w.y),
        error: String::new(),
    })
}

fn failed_trajectory_row(scheme: &str, t_s: f64, e: &Error) -> TrajectoryRow {
    TrajectoryRow {
        scheme: scheme.to_string(),
        t_s,
        slot: None,
        x_m: None,
        y_m: None,
        error: e.to_string(),
    }
}

fn power_sweep_warnings(points: &[SolvePoint]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let Some(asr) = p.asr() else { continue };
        let prev = points[..i].iter().rev().find(|q| {
            q.scheme == p.scheme && q.cfg.budgets.split == p.cfg.budgets.split
        });
        if let Some(prev_asr) = prev.and_then(SolvePoint::asr) {
            if asr < prev_asr - 1e-6 {
                out.push(format!(
                    "{} at lambda={}: ASR drops from {prev_asr:.6} to {asr:.6} at {:.2} dBm",
                    p.scheme,
                    p.cfg.budgets.split,
                    watts_to_dbm(p.cfg.budgets.p_ave_w)
                ));
            }
        }
    }
    out
}

fn error_text<T>(r: &std::result::Result<T, Error>) -> String {
    r.as_ref().err().map(Error::to_string).unwrap_or_default()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<PathBuf> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(path.to_path_buf())
}
