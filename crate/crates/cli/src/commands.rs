use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use diraclab_core::criteria::{classify_initial, ClassifierTolerances, FateClass};
use diraclab_core::hjlimit::{self, HjTrajectory, Phase};
use diraclab_core::model::ConcavityConstants;
use diraclab_core::scenarios::{self, log_spaced, sweep_member, SweepRow};
use diraclab_core::solver::{self, Trajectory};
use diraclab_core::{HjError, ScenarioError, SolverError};

use crate::config::RunConfig;
use crate::output::{num, Staged};

#[derive(Debug)]
pub enum CliError {
    /// Malformed or invalid configuration (exit code 2).
    Config(String),
    /// The computation itself failed (exit code 3).
    Numerical(String),
    Io(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Model(_) | SolverError::InvalidConfig(_) | SolverError::Unstable { .. } => {
                CliError::Config(e.to_string())
            }
            other => match other.last_good_time() {
                Some(t) => CliError::Numerical(format!("{other} (last good t = {t})")),
                None => CliError::Numerical(other.to_string()),
            },
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Solver(s) => s.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<HjError> for CliError {
    fn from(e: HjError) -> Self {
        match e {
            HjError::Model(_) | HjError::InvalidParameters(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

pub enum Source<'a> {
    Config(&'a Path),
    Preset(&'a str),
}

pub fn load(source: Source<'_>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let text = match source {
        Source::Config(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        Source::Preset(id) => {
            let p = scenarios::preset(id).map_err(|e| CliError::Config(e.to_string()))?;
            RunConfig::from_preset(p).to_text()
        }
    };
    RunConfig::parse_with_overrides(&text, overrides).map_err(|e| CliError::Config(e.to_string()))
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,rho,I,xbar,umax,J\n");
    for k in 0..traj.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(traj.times[k]),
            num(traj.rho[k]),
            num(traj.i_level[k]),
            num(traj.xbar[k]),
            num(traj.umax[k]),
            num(traj.j[k])
        );
    }
    out
}

pub fn snapshots_csv(traj: &Trajectory, cfg: &RunConfig) -> String {
    let grid = &cfg.preset.solver.grid;
    let mut out = String::from("t,x,n\n");
    for s in &traj.snapshots {
        let t = num(s.t);
        for (x, n) in grid.nodes().zip(&s.n) {
            let _ = writeln!(out, "{t},{},{}", num(x), num(*n));
        }
    }
    out
}

/// Runs the PDE and writes `<name>.csv` (and `<name>_snapshots.csv` when a stride is set).
pub fn simulate(cfg: &RunConfig, out_dir: &Path, snapshots: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let mut solver_cfg = cfg.preset.solver.clone();
    if let Some(stride) = snapshots {
        solver_cfg.snapshot_stride = stride;
    }
    let p = &cfg.preset;
    let traj = solver::run(&solver_cfg, &p.models, &p.schedule, &p.ic)?;
    let mut staged = Staged::new(out_dir)?;
    staged.add(&format!("{}.csv", cfg.name), trajectory_csv(&traj).as_bytes())?;
    if solver_cfg.snapshot_stride > 0 {
        staged.add(&format!("{}_snapshots.csv", cfg.name), snapshots_csv(&traj, cfg).as_bytes())?;
    }
    Ok(staged.commit()?)
}

/// Verdict for the environment active at `t = 0`.
pub fn classify(cfg: &RunConfig) -> FateClass {
    let p = &cfg.preset;
    let model = &p.models[p.schedule.model_at(0.0)];
    classify_initial(&p.ic, model, &p.solver.grid, &ClassifierTolerances::default())
}

pub fn classify_json(verdict: &FateClass) -> String {
    let witness: Vec<[f64; 2]> = verdict.witness.iter().map(|&(a, b)| [a, b]).collect();
    json!({ "tag": verdict.tag.as_str(), "witness": witness, "margin": verdict.margin }).to_string()
}

/// Which periods a sweep visits.
pub enum SweepValues {
    FromConfig,
    List(Vec<f64>),
    LogRange { lo: f64, hi: f64, n: usize },
}

pub fn parse_log_range(text: &str) -> Result<SweepValues, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Config(format!("--log-range expects lo:hi:count, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi >= lo && n >= 1) {
        return Err(bad());
    }
    Ok(SweepValues::LogRange { lo, hi, n })
}

pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<(f64, String)>,
    pub files: Vec<PathBuf>,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("T,mean_rho,min_rho,extinct\n");
    for r in rows {
        let extinct = if r.mean_rho.is_nan() { "NaN".to_string() } else { r.extinct.to_string() };
        let _ = writeln!(out, "{},{},{},{}", num(r.period), num(r.mean_rho), num(r.min_rho), extinct);
    }
    out
}

/// Runs every period independently on up to `jobs` threads; rows keep the input order.
pub fn sweep(
    cfg: &RunConfig,
    values: SweepValues,
    jobs: Option<usize>,
    out_dir: &Path,
) -> Result<SweepOutcome, CliError> {
    let settings = cfg.preset.sweep.clone().unwrap_or_default();
    let periods = match values {
        SweepValues::FromConfig => settings.periods.clone(),
        SweepValues::List(v) => v,
        SweepValues::LogRange { lo, hi, n } => log_spaced(lo, hi, n),
    };
    if periods.is_empty() {
        return Err(CliError::Config("no sweep periods: give --values, --log-range or sweep.periods".into()));
    }
    if let Some(p) = periods.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(CliError::Config(format!("sweep periods must be positive, got {p}")));
    }
    if cfg.preset.schedule.period().is_none() {
        return Err(ScenarioError::NotPeriodic.into());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| CliError::Io(e.into()))?;
    let results: Vec<Result<SweepRow, ScenarioError>> =
        pool.install(|| periods.par_iter().map(|&t| sweep_member(&cfg.preset, &settings, t)).collect());

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (t, r) in periods.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                failures.push((*t, e.to_string()));
                rows.push(SweepRow { period: *t, mean_rho: f64::NAN, min_rho: f64::NAN, extinct: false });
            }
        }
    }
    let mut staged = Staged::new(out_dir)?;
    staged.add(&format!("{}_sweep.csv", cfg.name), sweep_csv(&rows).as_bytes())?;
    let files = staged.commit()?;
    Ok(SweepOutcome { rows, failures, files })
}

pub fn hj_csv(traj: &HjTrajectory, cfg: &RunConfig) -> String {
    let p = &cfg.preset;
    let mut out = String::from("t,rho,I,xbar,umax,J,M,phase,source\n");
    for s in &traj.states {
        let model = &p.models[p.schedule.model_at(s.t)];
        let rho = s.i_level / p.solver.psi.eval(s.xbar);
        // dI/dt along the constraint
        let j = match s.phase {
            Phase::Persistent => {
                let g = model.rate_gradient(s.xbar, s.i_level);
                g * g / (s.m * model.competition())
            }
            Phase::Extinct => 0.0,
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},hj",
            num(s.t),
            num(rho),
            num(s.i_level),
            num(s.xbar),
            num(s.umax),
            num(j),
            num(s.m),
            s.phase.as_str()
        );
    }
    out
}

/// Duration bounds for the initial extinction phase, with the concavity constants taken
/// between `x0` and the viability boundary it moves toward.
pub fn duration_report(cfg: &RunConfig, traj: &HjTrajectory) -> serde_json::Value {
    let p = &cfg.preset;
    let model = &p.models[p.schedule.model_at(0.0)];
    let (x0, m0) = (p.hj.x0, p.hj.m0);
    let grad = model.rate_gradient(x0, 0.0);
    let boundary = model
        .trait_part()
        .real_roots()
        .into_iter()
        .filter(|&x| (x - x0) * grad > 0.0)
        .min_by(|a, b| (a - x0).abs().total_cmp(&(b - x0).abs()));
    let (lo, hi) = match boundary {
        Some(b) => (x0.min(b), x0.max(b)),
        None => (p.solver.grid.x_min(), p.solver.grid.x_max()),
    };
    let initially_extinct = traj.states.first().map(|s| s.phase == Phase::Extinct).unwrap_or(false);
    let measured = if initially_extinct { traj.recovery_times.first().copied() } else { None };
    let bounds = ConcavityConstants::for_model(model, lo, hi, m0)
        .map_err(|e| e.to_string())
        .and_then(|c| hjlimit::extinction_duration_bounds(model, x0, &c).map_err(|e| e.to_string()));
    let events: Vec<serde_json::Value> = traj
        .events
        .iter()
        .map(|e| json!({ "t": e.t, "from": e.from.as_str(), "to": e.to.as_str(), "model": e.model + 1 }))
        .collect();
    let (bounds_json, note, within) = match bounds {
        Ok(b) => {
            let within = measured.map(|t| b.lower <= t && t <= b.upper);
            let upper = if b.upper.is_finite() { json!(b.upper) } else { json!("inf") };
            (json!({ "lower": b.lower, "upper": upper, "a1": b.a1, "a2": b.a2 }), None, within)
        }
        Err(e) => (serde_json::Value::Null, Some(e), None),
    };
    json!({
        "x0": x0,
        "m0": m0,
        "bounds": bounds_json,
        "note": note,
        "tbar": measured,
        "tbar_within_bounds": within,
        "recovery_times": traj.recovery_times,
        "events": events,
    })
}

pub fn hjlimit(cfg: &RunConfig, out_dir: &Path) -> Result<(HjTrajectory, Vec<PathBuf>), CliError> {
    let p = &cfg.preset;
    let traj = hjlimit::hj_simulate(&p.models, &p.schedule, p.hj.x0, p.hj.m0, p.hj.t_end, p.hj.dt)?;
    let report = duration_report(cfg, &traj);
    let mut staged = Staged::new(out_dir)?;
    staged.add(&format!("{}_hj.csv", cfg.name), hj_csv(&traj, cfg).as_bytes())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.into()))?;
    staged.add(&format!("{}_bounds.json", cfg.name), format!("{json}\n").as_bytes())?;
    let files = staged.commit()?;
    Ok((traj, files))
}
