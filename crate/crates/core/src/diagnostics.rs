//! Hopf-Cole transform and the observables of the small-mutation limit: concentration
//! point, constraint residuals, zero set, `J_eps`, and BV statistics of `I_eps`.

use serde::{Deserialize, Serialize};

use crate::model::{GrowthModel, TraitGrid};

/// Default floor for `u = eps ln n`.
pub const DEFAULT_U_FLOOR: f64 = -2.0;

/// `u_i = max(eps ln n_i, u_floor)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HopfColeField {
    pub u: Vec<f64>,
    pub eps: f64,
    pub u_floor: f64,
}

pub fn hopf_cole(n: &[f64], eps: f64, u_floor: f64) -> HopfColeField {
    let u = n.iter().map(|&v| log_density(v, eps, u_floor)).collect();
    HopfColeField { u, eps, u_floor }
}

#[inline]
fn log_density(n: f64, eps: f64, u_floor: f64) -> f64 {
    if n > 0.0 {
        (eps * n.ln()).max(u_floor)
    } else {
        u_floor
    }
}

impl HopfColeField {
    /// Back to densities, `n_i = exp(u_i / eps)`.
    pub fn to_density(&self) -> Vec<f64> {
        self.u.iter().map(|u| (u / self.eps).exp()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub xbar: f64,
    pub u_max: f64,
    /// Discrete `D2u` at the maximizing node.
    pub curvature: f64,
    /// Maximal intervals (unions of grid cells) where `u >= -tol`.
    pub gamma_set: Vec<(f64, f64)>,
    pub max_index: usize,
    /// Maximum sits on a domain end; no parabolic refinement applied.
    pub at_boundary: bool,
}

/// Concentration report with the default zero-set tolerance `10 eps`.
pub fn concentration_point(field: &HopfColeField, grid: &TraitGrid) -> ConcentrationReport {
    concentration_point_with_tol(field, grid, 10.0 * field.eps)
}

pub fn concentration_point_with_tol(field: &HopfColeField, grid: &TraitGrid, tol_gamma: f64) -> ConcentrationReport {
    let u = &field.u;
    let i = argmax_first(u);
    let peak = refine_peak(u, i, grid);
    let last = u.len() - 1;
    let dx2 = grid.dx() * grid.dx();
    let curvature = if i == 0 {
        2.0 * (u[1] - u[0]) / dx2
    } else if i == last {
        2.0 * (u[last - 1] - u[last]) / dx2
    } else {
        (u[i - 1] - 2.0 * u[i] + u[i + 1]) / dx2
    };

    let half = 0.5 * grid.dx();
    let mut gamma_set = Vec::new();
    let mut start: Option<usize> = None;
    for (k, &v) in u.iter().enumerate() {
        match (v >= -tol_gamma, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                gamma_set.push(cell_span(grid, s, k - 1, half));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        gamma_set.push(cell_span(grid, s, last, half));
    }

    ConcentrationReport {
        xbar: peak.xbar,
        u_max: peak.u_max,
        curvature,
        gamma_set,
        max_index: i,
        at_boundary: peak.at_boundary,
    }
}

fn cell_span(grid: &TraitGrid, first: usize, last: usize, half: f64) -> (f64, f64) {
    ((grid.x(first) - half).max(grid.x_min()), (grid.x(last) + half).min(grid.x_max()))
}

/// Location and height of the maximum of a sampled field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub xbar: f64,
    pub u_max: f64,
    pub index: usize,
    pub at_boundary: bool,
}

/// First index of the largest value (ties go to the smaller `x`).
fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Parabola through the maximizing node and its neighbors; vertex gives `(xbar, u_max)`.
fn refine_peak(u: &[f64], i: usize, grid: &TraitGrid) -> Peak {
    let last = u.len() - 1;
    if i == 0 || i == last {
        return Peak { xbar: grid.x(i), u_max: u[i], index: i, at_boundary: true };
    }
    vertex(u[i - 1], u[i], u[i + 1], grid.x(i), grid.dx(), i)
}

#[inline]
fn vertex(um: f64, u0: f64, up: f64, x: f64, dx: f64, index: usize) -> Peak {
    let denom = um - 2.0 * u0 + up;
    if denom < 0.0 {
        let diff = um - up;
        let shift = 0.5 * diff / denom;
        Peak { xbar: x + shift * dx, u_max: u0 - 0.125 * diff * diff / denom, index, at_boundary: false }
    } else {
        Peak { xbar: x, u_max: u0, index, at_boundary: false }
    }
}

/// Same peak as `concentration_point(hopf_cole(n))` but only takes logarithms at three nodes.
pub fn peak_from_density(n: &[f64], grid: &TraitGrid, eps: f64, u_floor: f64) -> Peak {
    let i = argmax_first(n);
    let u = |k: usize| log_density(n[k], eps, u_floor);
    // clamped fields tie at the floor everywhere; the first node wins
    let i = if u(i) <= u_floor { 0 } else { i };
    let last = n.len() - 1;
    if i == 0 || i == last {
        return Peak { xbar: grid.x(i), u_max: u(i), index: i, at_boundary: true };
    }
    vertex(u(i - 1), u(i), u(i + 1), grid.x(i), grid.dx(), i)
}

/// `J = (1/eps) integral psi n R(., I)`, trapezoid rule.
pub fn compute_j(n: &[f64], model: &GrowthModel, i_level: f64, eps: f64, psi: &[f64], grid: &TraitGrid) -> f64 {
    let integrand: Vec<f64> =
        grid.nodes().zip(n.iter().zip(psi)).map(|(x, (&v, &w))| w * v * model.rate(x, i_level)).collect();
    grid.integrate(&integrand) / eps
}

/// Total variation `sum |I_{k+1} - I_k|`.
pub fn bv_norm(series: &[f64], times: &[f64]) -> f64 {
    debug_assert_eq!(series.len(), times.len());
    series.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Smallest one-sided slope `min_k (I_{k+1} - I_k) / (t_{k+1} - t_k)`.
pub fn sub_lipschitz_min_slope(series: &[f64], times: &[f64]) -> f64 {
    debug_assert_eq!(series.len(), times.len());
    series.windows(2).zip(times.windows(2)).map(|(s, t)| (s[1] - s[0]) / (t[1] - t[0])).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResiduals {
    pub max_u: f64,
    pub rate_at_xbar: f64,
}

/// `max u` and `R(xbar, I)`; both vanish in the limit while `I` stays bounded below.
pub fn constraint_residuals(report: &ConcentrationReport, model: &GrowthModel, i_level: f64) -> ConstraintResiduals {
    ConstraintResiduals { max_u: report.u_max, rate_at_xbar: model.rate(report.xbar, i_level) }
}
