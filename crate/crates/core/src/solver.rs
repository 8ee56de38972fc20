//! Semi-implicit finite-difference solver for
//! `d_t n - eps n_xx = n R(x, I(t)) / eps`, `I = integral psi n`.
//!
//! Diffusion and the (linear) reaction are implicit; the competition level `I` is frozen
//! at its value from the previous step. Each step is one tridiagonal solve whose matrix
//! is an M-matrix as long as `1 - (dt/eps) R_i > 0` at every node, so densities stay
//! nonnegative. Zero-flux (reflecting) ends conserve the trapezoid mass exactly.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DEFAULT_U_FLOOR};
use crate::error::SolverError;
use crate::model::{ConsumptionWeight, EnvironmentSchedule, GrowthBounds, GrowthModel, InitialCondition, TraitGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Boundary {
    #[default]
    NeumannZeroFlux,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub grid: TraitGrid,
    pub boundary: Boundary,
    /// Keep a density snapshot every `snapshot_stride` steps (0 = none).
    pub snapshot_stride: usize,
    /// Densities below this value are set to zero after each step (0 = off).
    pub density_floor: f64,
    pub psi: ConsumptionWeight,
    /// Floor of the Hopf-Cole field used for the `xbar`/`umax` observables.
    pub u_floor: f64,
}

impl SolverConfig {
    pub fn new(eps: f64, dt: f64, t_end: f64, grid: TraitGrid) -> Result<Self, SolverError> {
        let cfg = Self {
            eps,
            dt,
            t_end,
            grid,
            boundary: Boundary::NeumannZeroFlux,
            snapshot_stride: 0,
            density_floor: 0.0,
            psi: ConsumptionWeight::default(),
            u_floor: DEFAULT_U_FLOOR,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `eps = dx = 1e-3`, `dt = 1e-4` on `[-3, 3]`.
    pub fn standard(t_end: f64) -> Self {
        let grid = TraitGrid::with_spacing(-3.0, 3.0, 1e-3).expect("static grid");
        Self::new(1e-3, 1e-4, t_end, grid).expect("static config")
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be nonnegative, got {}", self.t_end));
        }
        if !(self.density_floor >= 0.0 && self.density_floor.is_finite()) {
            return bad(format!("density_floor must be nonnegative, got {}", self.density_floor));
        }
        if !(self.u_floor < 0.0) {
            return bad(format!("u_floor must be negative, got {}", self.u_floor));
        }
        self.psi.on_grid(&self.grid)?;
        Ok(())
    }

    /// `dt K0 / eps` for `model` on this grid; must stay below 1.
    pub fn stability_ratio(&self, model: &GrowthModel) -> f64 {
        let bounds = GrowthBounds::compute(model, &self.grid, 0.0);
        self.dt * bounds.k0.max(0.0) / self.eps
    }

    pub fn check_stability(&self, model: &GrowthModel) -> Result<(), SolverError> {
        let ratio = self.stability_ratio(model);
        if ratio < 1.0 {
            Ok(())
        } else {
            Err(SolverError::Unstable { ratio })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub n: Vec<f64>,
    /// `I = integral psi n`.
    pub i_level: f64,
    /// `rho = integral n`.
    pub rho: f64,
}

impl SimState {
    pub fn new(t: f64, n: Vec<f64>, grid: &TraitGrid, psi: &ConsumptionWeight) -> Result<Self, SolverError> {
        if n.len() != grid.n_points() {
            return Err(SolverError::InvalidConfig(format!(
                "density has {} values for {} nodes",
                n.len(),
                grid.n_points()
            )));
        }
        if n.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(SolverError::InvalidConfig("density must be finite and nonnegative".into()));
        }
        let weights = psi.on_grid(grid)?;
        let i_level = compute_i(&n, &weights, grid);
        let rho = compute_rho(&n, grid);
        Ok(Self { t, n, i_level, rho })
    }
}

/// Trapezoid quadrature of `psi n` with nodal weights `psi`.
pub fn compute_i(n: &[f64], psi: &[f64], grid: &TraitGrid) -> f64 {
    let weighted: Vec<f64> = n.iter().zip(psi).map(|(a, b)| a * b).collect();
    grid.integrate(&weighted)
}

pub fn compute_rho(n: &[f64], grid: &TraitGrid) -> f64 {
    grid.integrate(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub n: Vec<f64>,
}

/// Scalar observables recorded after every step, plus optional density snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub rho: Vec<f64>,
    pub i_level: Vec<f64>,
    pub xbar: Vec<f64>,
    pub umax: Vec<f64>,
    pub j: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// Number of steps in which the density floor zeroed at least one node.
    pub floor_applications: u64,
    pub final_state: SimState,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the last record with `t <= time` (records are time-ordered).
    pub fn index_at(&self, time: f64) -> usize {
        self.times.partition_point(|&t| t <= time + 1e-12).saturating_sub(1)
    }

    /// Records with `t0 <= t <= t1`, as an index range.
    pub fn window(&self, t0: f64, t1: f64) -> std::ops::Range<usize> {
        let lo = self.times.partition_point(|&t| t < t0 - 1e-12);
        let hi = self.times.partition_point(|&t| t <= t1 + 1e-12);
        lo..hi.max(lo)
    }

    fn push(&mut self, t: f64, rho: f64, i_level: f64, xbar: f64, umax: f64, j: f64) {
        self.times.push(t);
        self.rho.push(rho);
        self.i_level.push(i_level);
        self.xbar.push(xbar);
        self.umax.push(umax);
        self.j.push(j);
    }
}

/// Per-model data precomputed on the grid: `R_i = a_i - k I`.
#[derive(Debug, Clone)]
pub struct RateProfile {
    trait_part: Vec<f64>,
    competition: f64,
}

impl RateProfile {
    pub fn new(model: &GrowthModel, grid: &TraitGrid) -> Self {
        Self { trait_part: model.trait_profile(grid), competition: model.competition() }
    }

    pub fn rates(&self, i_level: f64, out: &mut [f64]) {
        let shift = self.competition * i_level;
        for (o, a) in out.iter_mut().zip(&self.trait_part) {
            *o = a - shift;
        }
    }
}

/// Reusable workspace for the tridiagonal step.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: TraitGrid,
    eps: f64,
    density_floor: f64,
    u_floor: f64,
    /// `psi_i` times the trapezoid weight.
    psi_weights: Vec<f64>,
    psi_constant: Option<f64>,
    upper: Vec<f64>,
    rates: Vec<f64>,
}

/// Observables of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub rho: f64,
    pub i_level: f64,
    pub xbar: f64,
    pub umax: f64,
    pub j: f64,
}

impl Stepper {
    pub fn new(cfg: &SolverConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        let psi = cfg.psi.on_grid(&cfg.grid)?;
        let psi_weights = psi.iter().zip(cfg.grid.trapezoid_weights()).map(|(p, w)| p * w).collect();
        let n = cfg.grid.n_points();
        Ok(Self {
            grid: cfg.grid.clone(),
            eps: cfg.eps,
            density_floor: cfg.density_floor,
            u_floor: cfg.u_floor,
            psi_weights,
            psi_constant: cfg.psi.is_constant(),
            upper: vec![0.0; n],
            rates: vec![0.0; n],
        })
    }

    /// One implicit step of length `dt` with nodal growth rates `rates`.
    ///
    /// Solves `(1 + 2 lam - mu R_i) m_i - lam (m_{i-1} + m_{i+1}) = n_i` with
    /// `lam = eps dt / dx^2`, `mu = dt / eps` and ghost-node reflection at both ends,
    /// overwriting `n` with the solution. Returns the number of nodes zeroed by the floor.
    pub fn advance_with_rates(&mut self, n: &mut [f64], rates: &[f64], dt: f64, t: f64) -> Result<usize, SolverError> {
        let len = n.len();
        debug_assert!(len >= 3 && rates.len() == len);
        let dx = self.grid.dx();
        let lam = self.eps * dt / (dx * dx);
        let mu = dt / self.eps;

        let diag = |i: usize| 1.0 + 2.0 * lam - mu * rates[i];
        for (i, &r) in rates.iter().enumerate() {
            // strict dominance: |diag| > sum of off-diagonal magnitudes
            if !(1.0 - mu * r > 0.0) {
                return Err(SolverError::DiagonalDominance { t, node: i });
            }
        }

        // forward sweep; `upper[i]` holds the magnitude of the normalized super-diagonal
        let b0 = diag(0);
        self.upper[0] = 2.0 * lam / b0;
        n[0] /= b0;
        for i in 1..len {
            let lower = if i == len - 1 { 2.0 * lam } else { lam };
            let pivot = diag(i) - lower * self.upper[i - 1];
            let inv = 1.0 / pivot;
            self.upper[i] = lam * inv;
            n[i] = (n[i] + lower * n[i - 1]) * inv;
        }
        for i in (0..len - 1).rev() {
            n[i] += self.upper[i] * n[i + 1];
        }

        // subnormals are flushed unconditionally; the configured floor on top of that
        let cut = self.density_floor.max(f64::MIN_POSITIVE);
        let mut floored = 0usize;
        for v in n.iter_mut() {
            if *v < cut {
                if *v >= f64::MIN_POSITIVE {
                    floored += 1;
                }
                *v = 0.0;
            }
        }
        Ok(floored)
    }

    /// Advances `state` by `dt` under `profile`, with `I` frozen at its current value.
    pub fn advance(&mut self, state: &mut SimState, profile: &RateProfile, dt: f64) -> Result<usize, SolverError> {
        let mut rates = std::mem::take(&mut self.rates);
        profile.rates(state.i_level, &mut rates);
        let t_new = state.t + dt;
        let res = self.advance_with_rates(&mut state.n, &rates, dt, t_new);
        self.rates = rates;
        let floored = res?;
        let last_good_t = state.t;
        state.t = t_new;
        state.rho = compute_rho(&state.n, &self.grid);
        state.i_level = match self.psi_constant {
            Some(c) => c * state.rho,
            None => state.n.iter().zip(&self.psi_weights).map(|(a, b)| a * b).sum(),
        };
        if !(state.rho.is_finite() && state.i_level.is_finite()) {
            return Err(SolverError::NonFinite { t: t_new, last_good_t });
        }
        Ok(floored)
    }

    pub fn observables(&self, state: &SimState, profile: &RateProfile) -> Observables {
        let peak = diagnostics::peak_from_density(&state.n, &self.grid, self.eps, self.u_floor);
        let weighted_a: f64 =
            state.n.iter().zip(&self.psi_weights).zip(&profile.trait_part).map(|((v, w), a)| v * w * a).sum();
        let j = (weighted_a - profile.competition * state.i_level * state.i_level) / self.eps;
        Observables { rho: state.rho, i_level: state.i_level, xbar: peak.xbar, umax: peak.u_max, j }
    }
}

/// One step from `state` under `model`; allocates a fresh workspace.
pub fn step(state: &SimState, cfg: &SolverConfig, model: &GrowthModel) -> Result<SimState, SolverError> {
    step_with_dt(state, cfg, model, cfg.dt)
}

pub fn step_with_dt(
    state: &SimState,
    cfg: &SolverConfig,
    model: &GrowthModel,
    dt: f64,
) -> Result<SimState, SolverError> {
    cfg.check_stability(model)?;
    let mut stepper = Stepper::new(cfg)?;
    let profile = RateProfile::new(model, &cfg.grid);
    let mut next = state.clone();
    stepper.advance(&mut next, &profile, dt)?;
    Ok(next)
}

/// Runs under a single environment.
pub fn run_single(cfg: &SolverConfig, model: &GrowthModel, ic: &InitialCondition) -> Result<Trajectory, SolverError> {
    run(cfg, std::slice::from_ref(model), &EnvironmentSchedule::constant(0), ic)
}

/// Runs from the sampled initial condition under a (possibly switching) environment.
pub fn run(
    cfg: &SolverConfig,
    models: &[GrowthModel],
    schedule: &EnvironmentSchedule,
    ic: &InitialCondition,
) -> Result<Trajectory, SolverError> {
    let n0 = ic.sample(&cfg.grid, cfg.eps)?;
    let state = SimState::new(0.0, n0, &cfg.grid, &cfg.psi)?;
    run_from(cfg, models, schedule, state)
}

pub fn run_from(
    cfg: &SolverConfig,
    models: &[GrowthModel],
    schedule: &EnvironmentSchedule,
    mut state: SimState,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    let mut used: Vec<usize> = schedule.model_ids().collect();
    used.sort_unstable();
    used.dedup();
    if let Some(&bad) = used.iter().find(|&&m| m >= models.len()) {
        return Err(SolverError::InvalidConfig(format!(
            "schedule refers to model {} but only {} are defined",
            bad + 1,
            models.len()
        )));
    }
    let mut i_cap: f64 = state.i_level;
    for &m in &used {
        cfg.check_stability(&models[m])?;
        let b = GrowthBounds::compute(&models[m], &cfg.grid, state.i_level);
        i_cap = i_cap.max(b.i_max);
    }
    let i_bound = 2.0 * i_cap * (1.0 + 1e-9) + 1e-300;

    let profiles: Vec<Option<RateProfile>> = (0..models.len())
        .map(|m| used.binary_search(&m).ok().map(|_| RateProfile::new(&models[m], &cfg.grid)))
        .collect();
    let profile_of = |m: usize| profiles[m].as_ref().expect("used model");

    let mut stepper = Stepper::new(cfg)?;
    let t0 = state.t;
    let t_end = t0 + cfg.t_end;
    let mut traj = Trajectory {
        times: Vec::new(),
        rho: Vec::new(),
        i_level: Vec::new(),
        xbar: Vec::new(),
        umax: Vec::new(),
        j: Vec::new(),
        snapshots: Vec::new(),
        floor_applications: 0,
        final_state: state.clone(),
    };
    let record = |traj: &mut Trajectory, stepper: &Stepper, state: &SimState, profile: &RateProfile| {
        let o = stepper.observables(state, profile);
        traj.push(state.t, o.rho, o.i_level, o.xbar, o.umax, o.j);
    };
    record(&mut traj, &stepper, &state, profile_of(schedule.model_at(t0)));
    if cfg.snapshot_stride > 0 {
        traj.snapshots.push(Snapshot { t: state.t, n: state.n.clone() });
    }

    let mut breaks = vec![t0];
    breaks.extend(schedule.switch_times(t_end).into_iter().filter(|&s| s > t0));
    breaks.push(t_end);

    // segment models are looked up at midpoints, away from roundoff at the switch instants
    let seg_models: Vec<usize> = breaks.windows(2).map(|w| schedule.model_at(0.5 * (w[0] + w[1]))).collect();
    let mut steps = 0usize;
    for (s, w) in breaks.windows(2).enumerate() {
        let (b0, b1) = (w[0], w[1]);
        let len = b1 - b0;
        if len <= 0.0 {
            continue;
        }
        if len < 1e-12 {
            return Err(SolverError::SwitchTime { switch: b1, error: len });
        }
        let profile = profile_of(seg_models[s]);
        let next_profile = profile_of(*seg_models.get(s + 1).unwrap_or(&seg_models[s]));
        let n_steps = ((len / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=n_steps {
            let target = if k == n_steps { b1 } else { b0 + k as f64 * cfg.dt };
            let dt = target - state.t;
            if stepper.advance(&mut state, profile, dt)? > 0 {
                traj.floor_applications += 1;
            }
            state.t = target;
            if state.i_level > i_bound {
                return Err(SolverError::CompetitionBound { t: state.t, value: state.i_level, bound: i_bound });
            }
            steps += 1;
            // observables belong to the environment active from this time on
            record(&mut traj, &stepper, &state, if k == n_steps { next_profile } else { profile });
            if cfg.snapshot_stride > 0 && steps.is_multiple_of(cfg.snapshot_stride) {
                traj.snapshots.push(Snapshot { t: state.t, n: state.n.clone() });
            }
        }
        if (state.t - b1).abs() > 1e-12 {
            return Err(SolverError::SwitchTime { switch: b1, error: state.t - b1 });
        }
    }
    traj.final_state = state;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Mass, Polynomial};

    fn small_cfg() -> SolverConfig {
        let grid = TraitGrid::new(-1.0, 1.0, 201).unwrap();
        SolverConfig::new(1e-2, 1e-3, 0.1, grid).unwrap()
    }

    #[test]
    fn compute_i_examples() {
        let grid = TraitGrid::new(-1.0, 1.0, 2001).unwrap();
        let ones = vec![1.0; grid.n_points()];
        assert!((compute_i(&ones, &ones, &grid) - 2.0).abs() < 1e-12);
        assert_eq!(compute_rho(&vec![0.0; grid.n_points()], &grid), 0.0);

        let grid = TraitGrid::with_spacing(-3.0, 3.0, 1e-3).unwrap();
        let psi = vec![1.0; grid.n_points()];
        let eps = 1e-3;
        let boxed = InitialCondition::Box { b: -0.6, c: -0.4, mass: Mass::Fixed(0.2) }.sample(&grid, eps).unwrap();
        assert!((compute_i(&boxed, &psi, &grid) - 0.2).abs() <= 4e-4);
        assert!((compute_rho(&boxed, &grid) - 0.2).abs() <= 4e-4);
        let gs = InitialCondition::GroundStateGaussian { g: 1.0, center: 0.0, mass: Mass::Fixed(0.25) }
            .sample(&grid, eps)
            .unwrap();
        assert!((compute_i(&gs, &psi, &grid) - 0.25).abs() <= 1e-6);
        let sum: Vec<f64> = boxed.iter().zip(&gs).map(|(a, b)| a + b).collect();
        let lin = compute_rho(&sum, &grid) - compute_rho(&boxed, &grid) - compute_rho(&gs, &grid);
        assert!(lin.abs() < 1e-14);
    }

    #[test]
    fn zero_rate_step_conserves_mass() {
        let cfg = small_cfg();
        let mut stepper = Stepper::new(&cfg).unwrap();
        let mut n: Vec<f64> = cfg.grid.nodes().map(|x| (-(x - 0.9) * (x - 0.9) / 0.01).exp()).collect();
        let rates = vec![0.0; n.len()];
        let m0 = compute_rho(&n, &cfg.grid);
        for _ in 0..100 {
            let before = compute_rho(&n, &cfg.grid);
            stepper.advance_with_rates(&mut n, &rates, cfg.dt, 0.0).unwrap();
            let after = compute_rho(&n, &cfg.grid);
            assert!(((after - before) / before).abs() <= 1e-12);
        }
        assert!(((compute_rho(&n, &cfg.grid) - m0) / m0).abs() < 1e-11);
    }

    #[test]
    fn loss_of_dominance_is_reported() {
        let cfg = small_cfg();
        let mut stepper = Stepper::new(&cfg).unwrap();
        let mut n = vec![1.0; cfg.grid.n_points()];
        let mut rates = vec![0.0; n.len()];
        rates[7] = cfg.eps / cfg.dt;
        let err = stepper.advance_with_rates(&mut n, &rates, cfg.dt, 0.5).unwrap_err();
        assert_eq!(err, SolverError::DiagonalDominance { t: 0.5, node: 7 });
    }

    #[test]
    fn unstable_config_is_rejected() {
        let cfg = small_cfg();
        let model = GrowthModel::quadratic(20.0, 1.0, 0.0).unwrap();
        assert!(matches!(cfg.check_stability(&model), Err(SolverError::Unstable { .. })));
        let ic = InitialCondition::Gaussian { center: 0.0, mass: Mass::Fixed(0.1) };
        assert!(run_single(&cfg, &model, &ic).is_err());
    }

    #[test]
    fn zero_horizon_records_only_the_initial_state() {
        let mut cfg = small_cfg();
        cfg.t_end = 0.0;
        let model = GrowthModel::quadratic(0.25, 1.0, 0.0).unwrap();
        let ic = InitialCondition::Gaussian { center: 0.0, mass: Mass::Fixed(0.1) };
        let traj = run_single(&cfg, &model, &ic).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.times, vec![0.0]);
    }

    #[test]
    fn step_matches_run() {
        let cfg = small_cfg();
        let model = GrowthModel::separable(Polynomial::new(vec![0.25, 0.0, -1.0])).unwrap();
        let ic = InitialCondition::Gaussian { center: 0.1, mass: Mass::Fixed(0.1) };
        let s0 = SimState::new(0.0, ic.sample(&cfg.grid, cfg.eps).unwrap(), &cfg.grid, &cfg.psi).unwrap();
        let s1 = step(&s0, &cfg, &model).unwrap();
        let mut short = cfg.clone();
        short.t_end = cfg.dt;
        let traj = run_single(&short, &model, &ic).unwrap();
        assert_eq!(traj.final_state.n, s1.n);
        assert_eq!(traj.rho[1], s1.rho);
        assert!((s1.t - cfg.dt).abs() < 1e-18);
    }

    #[test]
    fn switch_times_land_on_step_boundaries() {
        let mut cfg = small_cfg();
        cfg.t_end = 0.35;
        let models =
            vec![GrowthModel::quadratic(0.5, 1.0, -0.5).unwrap(), GrowthModel::quadratic(0.5, 1.0, 0.5).unwrap()];
        // period 0.1234 is not a multiple of dt
        let schedule = EnvironmentSchedule::alternating(0, 1, 0.1234).unwrap();
        let ic = InitialCondition::Gaussian { center: 0.0, mass: Mass::Fixed(0.25) };
        let traj = run(&cfg, &models, &schedule, &ic).unwrap();
        for s in schedule.switch_times(cfg.t_end) {
            assert!(traj.times.contains(&s), "missing switch {s}");
        }
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*traj.times.last().unwrap(), 0.35);
    }

    #[test]
    fn snapshots_follow_stride() {
        let mut cfg = small_cfg();
        cfg.snapshot_stride = 10;
        cfg.t_end = 0.05;
        let model = GrowthModel::quadratic(0.25, 1.0, 0.0).unwrap();
        let ic = InitialCondition::Gaussian { center: 0.0, mass: Mass::Fixed(0.1) };
        let traj = run_single(&cfg, &model, &ic).unwrap();
        assert_eq!(traj.snapshots.len(), 6);
        assert_eq!(traj.snapshots[0].t, 0.0);
    }

    #[test]
    fn floor_is_counted() {
        let mut cfg = small_cfg();
        cfg.density_floor = 1e-3;
        let model = GrowthModel::quadratic(0.25, 1.0, 0.0).unwrap();
        let ic = InitialCondition::Gaussian { center: 0.0, mass: Mass::Fixed(0.1) };
        let traj = run_single(&cfg, &model, &ic).unwrap();
        assert!(traj.floor_applications > 0);
        assert!(traj.final_state.n.iter().all(|&v| v == 0.0 || v >= 1e-3));
    }

    #[test]
    fn bad_model_index_is_rejected() {
        let cfg = small_cfg();
        let models = vec![GrowthModel::quadratic(0.25, 1.0, 0.0).unwrap()];
        let schedule = EnvironmentSchedule::alternating(0, 1, 1.0).unwrap();
        let ic = InitialCondition::Gaussian { center: 0.0, mass: Mass::Fixed(0.1) };
        assert!(matches!(run(&cfg, &models, &schedule, &ic), Err(SolverError::InvalidConfig(_))));
    }

    #[test]
    fn pure_diffusion_matches_heat_kernel() {
        let eps = 1e-2;
        let grid = TraitGrid::with_spacing(-1.5, 1.5, 1e-2).unwrap();
        let cfg = SolverConfig::new(eps, 1e-3, 1.0, grid.clone()).unwrap();
        let mut stepper = Stepper::new(&cfg).unwrap();
        let gauss = |x: f64, var: f64| (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
        let var0 = 0.01;
        let mut n: Vec<f64> = grid.nodes().map(|x| gauss(x, var0)).collect();
        let rates = vec![0.0; n.len()];
        for k in 0..1000 {
            stepper.advance_with_rates(&mut n, &rates, cfg.dt, k as f64 * cfg.dt).unwrap();
        }
        // dn/dt = eps n'' spreads the variance by 2 eps t
        let exact: Vec<f64> = grid.nodes().map(|x| gauss(x, var0 + 2.0 * eps)).collect();
        let diff: Vec<f64> = n.iter().zip(&exact).map(|(a, b)| (a - b).abs()).collect();
        let l1 = grid.integrate(&diff) / grid.integrate(&exact);
        assert!(l1 <= 1e-2, "relative L1 error {l1}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(1000))]

        #[test]
        fn steps_keep_density_nonnegative(
            init in proptest::collection::vec(0.0f64..10.0, 41),
            rates in proptest::collection::vec(-20.0f64..0.99, 41),
            sparse in proptest::collection::vec(proptest::bool::ANY, 41),
            steps in 1usize..20,
        ) {
            let grid = TraitGrid::new(-1.0, 1.0, 41).unwrap();
            let cfg = SolverConfig::new(1e-2, 1e-2, 1.0, grid).unwrap();
            let mut stepper = Stepper::new(&cfg).unwrap();
            // rates are scaled so that 1 - mu r stays above 0.01
            let rates: Vec<f64> = rates.iter().map(|r| r * cfg.eps / cfg.dt).collect();
            let mut n: Vec<f64> = init.iter().zip(&sparse).map(|(v, keep)| if *keep { *v } else { 0.0 }).collect();
            for k in 0..steps {
                stepper.advance_with_rates(&mut n, &rates, cfg.dt, k as f64).unwrap();
                proptest::prop_assert!(n.iter().all(|v| *v >= 0.0 && v.is_finite()));
            }
        }
    }
}
