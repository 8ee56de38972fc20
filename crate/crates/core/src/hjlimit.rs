//! Small-mutation limit dynamics of a concentrated population.
//!
//! The dominant trait follows `xbar' = D_x R(xbar, I) / M` where `M = -D2u(t, xbar)`.
//! The curvature is closed with the ansatz `u = -M (x - xbar)^2 / 2`, which gives
//! `M' = -2 M^2 - D2_x R(xbar, I)`. While the population persists, `I` is pinned by
//! `R(xbar, I) = 0`; during an extinction phase `I = 0` and `max u` decreases at rate
//! `R(xbar, 0) < 0` until `xbar` re-enters the viable region.

use serde::{Deserialize, Serialize};

use crate::error::HjError;
use crate::model::{ConcavityConstants, EnvironmentSchedule, GrowthModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Persistent,
    Extinct,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Persistent => "Persistent",
            Phase::Extinct => "Extinct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HJState {
    pub t: f64,
    pub xbar: f64,
    /// Curvature `-D2u` at `xbar`.
    pub m: f64,
    pub i_level: f64,
    pub phase: Phase,
    /// `max u`: zero while persistent, negative during an extinction phase.
    pub umax: f64,
}

impl HJState {
    /// State at `t = 0`; the phase follows the sign of `R(x0, 0)` (zero counts as extinct).
    pub fn initial(model: &GrowthModel, x0: f64, m0: f64) -> Result<Self, HjError> {
        if !(x0.is_finite() && m0 > 0.0 && m0.is_finite()) {
            return Err(HjError::InvalidParameters(format!("need finite x0 and M0 > 0, got ({x0}, {m0})")));
        }
        Ok(Self::entering(model, 0.0, x0, m0, 0.0))
    }

    fn entering(model: &GrowthModel, t: f64, xbar: f64, m: f64, umax: f64) -> Self {
        let r0 = model.rate(xbar, 0.0);
        if r0 > 0.0 {
            Self { t, xbar, m, i_level: r0 / model.competition(), phase: Phase::Persistent, umax: 0.0 }
        } else {
            Self { t, xbar, m, i_level: 0.0, phase: Phase::Extinct, umax }
        }
    }
}

/// `I >= 0` with `R(xbar, I) = 0`.
pub fn solve_i_constraint(model: &GrowthModel, xbar: f64) -> Result<f64, HjError> {
    let r0 = model.rate(xbar, 0.0);
    if r0 < 0.0 {
        return Err(HjError::NoViableLevel { xbar, rate: r0 });
    }
    // R is affine in I for every supported family
    Ok(r0 / model.competition())
}

fn field(model: &GrowthModel, phase: Phase, y: [f64; 3]) -> [f64; 3] {
    let [x, m, _] = y;
    let grad = model.rate_gradient(x, 0.0);
    let curv = model.rate_curvature(x, 0.0);
    let du = match phase {
        Phase::Persistent => 0.0,
        Phase::Extinct => model.rate(x, 0.0),
    };
    [grad / m, -2.0 * m * m - curv, du]
}

fn rk4(model: &GrowthModel, phase: Phase, y: [f64; 3], h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
    let k1 = field(model, phase, y);
    let k2 = field(model, phase, add(y, k1, 0.5 * h));
    let k3 = field(model, phase, add(y, k2, 0.5 * h));
    let k4 = field(model, phase, add(y, k3, h));
    let mut out = y;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// One RK4 step of length `dt`, then the phase update (extinct to persistent once
/// `R(xbar, 0) >= 0`).
pub fn hj_step(state: &HJState, model: &GrowthModel, dt: f64) -> Result<HJState, HjError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(HjError::InvalidParameters(format!("dt must be positive, got {dt}")));
    }
    let [xbar, m, umax] = rk4(model, state.phase, [state.xbar, state.m, state.umax], dt);
    let t = state.t + dt;
    if !(m > 0.0 && m.is_finite() && xbar.is_finite()) {
        return Err(HjError::CurvatureBreakdown { t, m });
    }
    let r0 = model.rate(xbar, 0.0);
    Ok(match state.phase {
        Phase::Persistent => {
            HJState { t, xbar, m, i_level: r0.max(0.0) / model.competition(), phase: Phase::Persistent, umax: 0.0 }
        }
        Phase::Extinct if r0 >= 0.0 => {
            HJState { t, xbar, m, i_level: r0 / model.competition(), phase: Phase::Persistent, umax: 0.0 }
        }
        Phase::Extinct => HJState { t, xbar, m, i_level: 0.0, phase: Phase::Extinct, umax },
    })
}

/// Two-sided bound on the duration of the extinction phase started at `xbar0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationBounds {
    pub lower: f64,
    pub upper: f64,
    pub a1: f64,
    pub a2: f64,
}

/// `A1 (-R0) / |D_x R(xbar0, 0)|^2 <= Tbar <= A2 (-R0) / |D_x R(xbar(Tbar), 0)|^2`
/// with `A1 = min(2 L1_upper, sqrt K2_upper)`, `A2 = max(2 L1_lower, sqrt K2_lower)` and
/// `xbar(Tbar)` the nearest root of `R(., 0)` in the direction of the initial gradient.
///
/// The upper bound is infinite when no such root exists or the landscape is flat there.
pub fn extinction_duration_bounds(
    model: &GrowthModel,
    xbar0: f64,
    constants: &ConcavityConstants,
) -> Result<DurationBounds, HjError> {
    let a1 = constants.curvature_floor();
    let a2 = constants.curvature_ceiling();
    let r0 = model.rate(xbar0, 0.0);
    if r0 == 0.0 {
        return Ok(DurationBounds { lower: 0.0, upper: 0.0, a1, a2 });
    }
    if r0 > 0.0 {
        return Err(HjError::AlreadyViable { xbar: xbar0, rate: r0 });
    }
    let grad0 = model.rate_gradient(xbar0, 0.0);
    if grad0 == 0.0 {
        return Err(HjError::NoDrift { xbar: xbar0 });
    }
    let lower = a1 * (-r0) / (grad0 * grad0);
    let target = model
        .trait_part()
        .real_roots()
        .into_iter()
        .filter(|&x| (x - xbar0) * grad0 > 0.0)
        .min_by(|a, b| (a - xbar0).abs().total_cmp(&(b - xbar0).abs()));
    let upper = match target {
        Some(x) => {
            let g = model.rate_gradient(x, 0.0);
            if g == 0.0 {
                f64::INFINITY
            } else {
                a2 * (-r0) / (g * g)
            }
        }
        None => f64::INFINITY,
    };
    Ok(DurationBounds { lower, upper, a1, a2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEvent {
    pub t: f64,
    pub from: Phase,
    pub to: Phase,
    /// Index of the environment active after the event.
    pub model: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HjTrajectory {
    pub states: Vec<HJState>,
    pub events: Vec<PhaseEvent>,
    /// Ends of extinction phases (`R(xbar, 0)` back to zero).
    pub recovery_times: Vec<f64>,
}

/// Integrates the limit dynamics under a switching environment, landing exactly on every
/// switch time. At a switch the phase is re-decided by the sign of the new `R(xbar, 0)`.
pub fn hj_simulate(
    models: &[GrowthModel],
    schedule: &EnvironmentSchedule,
    x0: f64,
    m0: f64,
    t_end: f64,
    dt: f64,
) -> Result<HjTrajectory, HjError> {
    if !(dt > 0.0 && dt.is_finite() && t_end >= 0.0 && t_end.is_finite()) {
        return Err(HjError::InvalidParameters(format!("need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}")));
    }
    if let Some(bad) = schedule.model_ids().find(|&m| m >= models.len()) {
        return Err(HjError::InvalidParameters(format!(
            "schedule refers to model {} but only {} are defined",
            bad + 1,
            models.len()
        )));
    }
    let mut breaks = vec![0.0];
    breaks.extend(schedule.switch_times(t_end));
    breaks.push(t_end);
    let seg_models: Vec<usize> = breaks.windows(2).map(|w| schedule.model_at(0.5 * (w[0] + w[1]))).collect();

    let first = seg_models.first().copied().unwrap_or_else(|| schedule.model_at(0.0));
    let mut state = HJState::initial(&models[first], x0, m0)?;
    let mut out = HjTrajectory { states: vec![state], events: Vec::new(), recovery_times: Vec::new() };

    for (s, w) in breaks.windows(2).enumerate() {
        let (b0, b1) = (w[0], w[1]);
        if b1 <= b0 {
            continue;
        }
        let id = seg_models[s];
        let model = &models[id];
        if s > 0 {
            let before = state.phase;
            state = HJState::entering(model, b0, state.xbar, state.m, state.umax);
            if state.phase != before {
                out.events.push(PhaseEvent { t: b0, from: before, to: state.phase, model: id });
            }
            *out.states.last_mut().unwrap() = state;
        }
        let n_steps = (((b1 - b0) / dt) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=n_steps {
            let target = if k == n_steps { b1 } else { b0 + k as f64 * dt };
            let h = target - state.t;
            let mut next = hj_step(&state, model, h)?;
            if state.phase == Phase::Extinct && next.phase == Phase::Persistent {
                let tau = locate_recovery(&state, model, h)?;
                let at = hj_step(&state, model, tau)?;
                let at = HJState { i_level: 0.0, phase: Phase::Persistent, umax: 0.0, ..at };
                out.recovery_times.push(at.t);
                out.events.push(PhaseEvent { t: at.t, from: Phase::Extinct, to: Phase::Persistent, model: id });
                out.states.push(at);
                next = if h - tau > 0.0 { hj_step(&at, model, h - tau)? } else { at };
            }
            next.t = target;
            out.states.push(next);
            state = next;
        }
    }
    Ok(out)
}

/// Sub-step length at which `R(xbar, 0)` reaches zero, by bisection to `1e-9` in time.
fn locate_recovery(state: &HJState, model: &GrowthModel, h: f64) -> Result<f64, HjError> {
    let rate_after = |tau: f64| -> f64 {
        let [x, _, _] = rk4(model, Phase::Extinct, [state.xbar, state.m, state.umax], tau);
        model.rate(x, 0.0)
    };
    let (mut lo, mut hi) = (0.0, h);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if rate_after(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
