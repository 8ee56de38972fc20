//! Named scenario bundles and the per-period statistics used by period sweeps.

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::model::{EnvironmentSchedule, GrowthModel, InitialCondition, Mass, Polynomial};
use crate::solver::{self, SolverConfig, Trajectory};

pub const PRESET_IDS: [&str; 10] = [
    "fig1-persistence",
    "fig1-extinction",
    "fig2-far",
    "fig2-near",
    "fig4-remark",
    "fig5-slow",
    "fig5-fast",
    "fig6-sweep",
    "fig7-slow",
    "fig7-fast",
];

/// Parameters of the limit ODE run attached to a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HjSettings {
    pub x0: f64,
    pub m0: f64,
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub periods: Vec<f64>,
    /// At least this many full periods are simulated before statistics are taken...
    pub burn_in_periods: usize,
    /// ...and at least this much time.
    pub min_burn_in: f64,
    /// A member counts as extinct when `min rho` over the measured period falls below this.
    pub extinction_threshold: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self { periods: Vec::new(), burn_in_periods: 10, min_burn_in: 10.0, extinction_threshold: 1e-4 }
    }
}

/// Everything needed for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub id: String,
    pub solver: SolverConfig,
    pub models: Vec<GrowthModel>,
    pub schedule: EnvironmentSchedule,
    pub ic: InitialCondition,
    pub hj: HjSettings,
    pub sweep: Option<SweepSettings>,
}

impl Preset {
    pub fn run(&self) -> Result<Trajectory, ScenarioError> {
        Ok(solver::run(&self.solver, &self.models, &self.schedule, &self.ic)?)
    }

    /// Same scenario at another mutation scale, keeping grid and time step.
    pub fn with_eps(&self, eps: f64) -> Self {
        let mut out = self.clone();
        out.solver.eps = eps;
        out
    }
}

pub fn preset_ids() -> &'static [&'static str] {
    &PRESET_IDS
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

pub fn preset(id: &str) -> Result<Preset, ScenarioError> {
    let eps_dx = 1e-3;
    let solver_for = |t_end: f64| SolverConfig::standard(t_end);
    let fig1 = || GrowthModel::separable(Polynomial::new(vec![0.25, 0.0, -1.0])).expect("static model");
    let quartic =
        || GrowthModel::separable(Polynomial::from_roots(-1.0, &[0.0, 0.0, 0.75, 2.0])).expect("static model");
    let switching = |r: f64, g: f64, theta: f64| {
        vec![
            GrowthModel::quadratic(r, g, -theta).expect("static model"),
            GrowthModel::quadratic(r, g, theta).expect("static model"),
        ]
    };
    let alternating = |period: f64| EnvironmentSchedule::alternating(0, 1, period).expect("static schedule");
    let hj = |x0: f64, m0: f64, t_end: f64| HjSettings { x0, m0, dt: 1e-3, t_end };
    let ground = |g: f64| InitialCondition::GroundStateGaussian { g, center: 0.0, mass: Mass::Fixed(0.25) };
    let fig7 = || {
        vec![
            GrowthModel::separable(Polynomial::new(vec![0.7, 0.0, -0.2])).expect("static model"),
            GrowthModel::separable(Polynomial::new(vec![0.2, 0.0, 0.8, 0.0, -2.0 / 3.0])).expect("static model"),
        ]
    };
    let fig7_ic = InitialCondition::Gaussian { center: 1.0, mass: Mass::Fixed(0.25) };
    debug_assert_eq!(SolverConfig::standard(1.0).grid.dx(), eps_dx);

    let p = match id {
        "fig1-persistence" | "fig1-extinction" => {
            let (b, c) = if id == "fig1-persistence" { (-0.6, -0.4) } else { (-0.7, -0.6) };
            Preset {
                id: id.into(),
                solver: solver_for(10.0),
                models: vec![fig1()],
                schedule: EnvironmentSchedule::constant(0),
                ic: InitialCondition::Box { b, c, mass: Mass::Fixed(0.2) },
                // concave analogue of the box: unit-curvature profile at a nearby trait
                hj: if id == "fig1-persistence" { hj(-0.45, 1.0, 10.0) } else { hj(-0.65, 1.0, 10.0) },
                sweep: None,
            }
        }
        "fig2-far" | "fig2-near" => {
            let center = if id == "fig2-far" { 0.0 } else { 0.75 };
            Preset {
                id: id.into(),
                solver: solver_for(10.0),
                models: vec![quartic()],
                schedule: EnvironmentSchedule::constant(0),
                ic: InitialCondition::Gaussian { center, mass: Mass::Fixed(0.2) },
                hj: hj(center, 1.0, 10.0),
                sweep: None,
            }
        }
        "fig4-remark" => Preset {
            id: id.into(),
            solver: solver_for(10.0),
            models: vec![fig1()],
            schedule: EnvironmentSchedule::constant(0),
            ic: InitialCondition::Mixture(vec![
                InitialCondition::Gaussian { center: -0.75, mass: Mass::Fixed(0.2) },
                InitialCondition::Gaussian { center: 0.0, mass: Mass::PerEpsilon(1.0) },
            ]),
            hj: hj(-0.75, 1.0, 10.0),
            sweep: None,
        },
        "fig5-slow" | "fig5-fast" => {
            let (period, t_end) = if id == "fig5-slow" { (1.0, 1.0) } else { (0.2, 4.0) };
            Preset {
                id: id.into(),
                solver: solver_for(t_end),
                models: switching(0.5, 1.0, 0.5),
                schedule: alternating(period),
                ic: ground(1.0),
                hj: hj(0.0, 1.0, t_end),
                sweep: Some(SweepSettings { periods: vec![0.2, 1.0], ..SweepSettings::default() }),
            }
        }
        "fig6-sweep" => Preset {
            id: id.into(),
            solver: solver_for(11.0),
            models: switching(1.0, 0.2, 1.0),
            schedule: alternating(1.0),
            ic: ground(0.2),
            hj: hj(0.0, 0.2f64.sqrt(), 11.0),
            sweep: Some(SweepSettings { periods: log_spaced(0.1, 5.0, 16), ..SweepSettings::default() }),
        },
        "fig7-slow" | "fig7-fast" => {
            let (period, t_end) = if id == "fig7-slow" { (10.0, 40.0) } else { (1.0, 20.0) };
            Preset {
                id: id.into(),
                solver: solver_for(t_end),
                models: fig7(),
                schedule: alternating(period),
                ic: fig7_ic,
                hj: hj(1.0, 1.0, t_end),
                sweep: Some(SweepSettings { periods: vec![1.0, 10.0], ..SweepSettings::default() }),
            }
        }
        other => return Err(ScenarioError::UnknownPreset(other.to_string())),
    };
    Ok(p)
}

/// Statistics of one sweep member over its last simulated period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub period: f64,
    pub mean_rho: f64,
    pub min_rho: f64,
    pub extinct: bool,
}

/// Number of periods simulated before the measured one.
pub fn burn_in_periods(settings: &SweepSettings, period: f64) -> usize {
    let by_time = (settings.min_burn_in / period - 1e-9).ceil().max(0.0) as usize;
    settings.burn_in_periods.max(by_time)
}

/// Runs `base` with its periodic schedule stretched to `period`, past the burn-in, and
/// reports the time-mean and minimum of `rho` over the final period.
pub fn sweep_member(base: &Preset, settings: &SweepSettings, period: f64) -> Result<SweepRow, ScenarioError> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(ScenarioError::InvalidPeriod(period));
    }
    if base.schedule.period().is_none() {
        return Err(ScenarioError::NotPeriodic);
    }
    let schedule = base.schedule.with_period(period)?;
    let n_burn = burn_in_periods(settings, period);
    let t_end = (n_burn + 1) as f64 * period;
    let mut cfg = base.solver.clone();
    cfg.t_end = t_end;
    cfg.snapshot_stride = 0;
    let traj = solver::run(&cfg, &base.models, &schedule, &base.ic)?;
    let (mean_rho, min_rho) = period_stats(&traj, t_end - period, t_end);
    Ok(SweepRow { period, mean_rho, min_rho, extinct: min_rho < settings.extinction_threshold })
}

/// Trapezoid time-mean and minimum of `rho` over `[t0, t1]`.
pub fn period_stats(traj: &Trajectory, t0: f64, t1: f64) -> (f64, f64) {
    let w = traj.window(t0, t1);
    let (t, rho) = (&traj.times[w.clone()], &traj.rho[w]);
    let integral: f64 = t.windows(2).zip(rho.windows(2)).map(|(tt, rr)| 0.5 * (tt[1] - tt[0]) * (rr[0] + rr[1])).sum();
    let span = t.last().copied().unwrap_or(t0) - t.first().copied().unwrap_or(t0);
    let mean = if span > 0.0 { integral / span } else { rho.first().copied().unwrap_or(f64::NAN) };
    let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    (mean, min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{classify_initial, ClassifierTolerances, FateTag};
    use crate::model::GrowthBounds;

    #[test]
    fn every_id_resolves() {
        for id in preset_ids() {
            let p = preset(id).unwrap();
            assert_eq!(p.id, *id);
            p.ic.validate().unwrap();
            for m in &p.models {
                let k0 = GrowthBounds::compute(m, &p.solver.grid, 1.0).k0;
                assert!(p.solver.dt * k0 / p.solver.eps < 1.0, "{id}");
            }
        }
        assert!(matches!(preset("fig3"), Err(ScenarioError::UnknownPreset(_))));
    }

    #[test]
    fn preset_parameters() {
        let p = preset("fig1-persistence").unwrap();
        assert_eq!(p.ic, InitialCondition::Box { b: -0.6, c: -0.4, mass: Mass::Fixed(0.2) });
        assert_eq!((p.solver.eps, p.solver.dt, p.solver.grid.dx()), (1e-3, 1e-4, 1e-3));
        let p = preset("fig6-sweep").unwrap();
        assert_eq!(p.models[1], GrowthModel::QuadraticConcave { r: 1.0, g: 0.2, theta: 1.0 });
        assert_eq!(p.sweep.unwrap().periods.len(), 16);
        assert_eq!(preset("fig7-slow").unwrap().schedule.period(), Some(10.0));
        assert_eq!(preset("fig7-fast").unwrap().schedule.period(), Some(1.0));
        let p = preset("fig5-slow").unwrap();
        // first environment favours -theta
        assert!(p.models[0].rate(-0.5, 0.0) > p.models[0].rate(0.5, 0.0));
    }

    #[test]
    fn classifier_tags_of_constant_presets() {
        let tol = ClassifierTolerances::default();
        let expect = [
            ("fig1-persistence", FateTag::Persistence),
            ("fig1-extinction", FateTag::ExtinctionInterval),
            ("fig2-far", FateTag::Critical),
            ("fig2-near", FateTag::Critical),
            ("fig4-remark", FateTag::Unclassified),
        ];
        for (id, tag) in expect {
            let p = preset(id).unwrap();
            assert_eq!(classify_initial(&p.ic, &p.models[0], &p.solver.grid, &tol).tag, tag, "{id}");
        }
    }

    #[test]
    fn log_spacing() {
        let v = log_spaced(0.1, 5.0, 8);
        assert_eq!(v.len(), 8);
        assert_eq!((v[0], v[7]), (0.1, 5.0));
        let ratio = v[1] / v[0];
        assert!(v.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 1e-12));
        assert_eq!(log_spaced(0.3, 5.0, 1), vec![0.3]);
    }

    #[test]
    fn burn_in_rules() {
        let s = SweepSettings::default();
        assert_eq!(burn_in_periods(&s, 0.1), 100);
        assert_eq!(burn_in_periods(&s, 1.0), 10);
        assert_eq!(burn_in_periods(&s, 5.0), 10);
    }

    #[test]
    fn stats_of_a_linear_series() {
        let mut traj = solver::run_single(
            &{
                let mut c = SolverConfig::standard(0.0);
                c.grid = crate::model::TraitGrid::new(-1.0, 1.0, 11).unwrap();
                c
            },
            &GrowthModel::quadratic(0.1, 1.0, 0.0).unwrap(),
            &InitialCondition::Box { b: -0.5, c: 0.5, mass: Mass::Fixed(0.1) },
        )
        .unwrap();
        traj.times = vec![0.0, 0.5, 1.0, 1.5, 2.0];
        traj.rho = vec![5.0, 1.0, 2.0, 3.0, 4.0];
        let (mean, min) = period_stats(&traj, 1.0, 2.0);
        assert!((mean - 3.0).abs() < 1e-15);
        assert_eq!(min, 2.0);
    }
}
