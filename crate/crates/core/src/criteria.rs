//! Classification of the small-mutation fate from the initial data alone, and the
//! viability sets `Omega_I = {x : R(x, I) > 0}`.

use serde::{Deserialize, Serialize};

use crate::model::{GrowthModel, InitialCondition, Polynomial, TraitGrid};
use crate::solver::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FateTag {
    Persistence,
    ExtinctionInterval,
    ExtinctionPoint,
    Critical,
    Unclassified,
}

impl FateTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            FateTag::Persistence => "Persistence",
            FateTag::ExtinctionInterval => "ExtinctionInterval",
            FateTag::ExtinctionPoint => "ExtinctionPoint",
            FateTag::Critical => "Critical",
            FateTag::Unclassified => "Unclassified",
        }
    }
}

impl std::fmt::Display for FateTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Verdict with the intervals (or points, as `[x, x]`) supporting it.
///
/// For `Persistence` the witness is `supp n0` intersected with `Omega_0`; for the extinction
/// tags it is the point of the initial zero set where `R(., 0)` is largest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FateClass {
    pub tag: FateTag,
    pub witness: Vec<(f64, f64)>,
    /// `C` such that `R(., 0) <= -C` on the initial zero set (`ExtinctionInterval` only).
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTolerances {
    /// Minimal `C` separating `ExtinctionInterval` from the touching cases.
    pub margin: f64,
    /// Values of `R` with `|R| <= zero` count as zero.
    pub zero: f64,
}

impl Default for ClassifierTolerances {
    fn default() -> Self {
        Self { margin: 1e-6, zero: 1e-12 }
    }
}

/// Maximal open intervals of the grid domain where `R(., i_level) > 0`.
pub fn omega_set(model: &GrowthModel, i_level: f64, grid: &TraitGrid) -> Vec<(f64, f64)> {
    let shifted = model.trait_part().add_constant(-model.competition() * i_level);
    positive_intervals(&shifted, grid.x_min(), grid.x_max())
}

fn positive_intervals(p: &Polynomial, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![lo];
    cuts.extend(p.roots_in(lo, hi).into_iter().filter(|&r| r > lo && r < hi));
    cuts.push(hi);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a || p.eval(0.5 * (a + b)) <= 0.0 {
            continue;
        }
        out.push((a, b));
    }
    out
}

/// Fate of the solution issued from `ic` as `eps -> 0`, decided from the limit support
/// and the zero set of the initial Hopf-Cole field.
pub fn classify_initial(
    ic: &InitialCondition,
    model: &GrowthModel,
    grid: &TraitGrid,
    tol: &ClassifierTolerances,
) -> FateClass {
    let a = model.trait_part();
    let clip = |(l, h): (f64, f64)| -> Option<(f64, f64)> {
        let (l, h) = (l.max(grid.x_min()), h.min(grid.x_max()));
        (l <= h).then_some((l, h))
    };
    let limit = ic.limit_support();
    let support: Vec<(f64, f64)> = limit.support.into_iter().filter_map(clip).collect();
    let zero_set: Vec<(f64, f64)> = limit.zero_set.into_iter().filter_map(clip).collect();

    let omega = omega_set(model, 0.0, grid);
    let mut witness = Vec::new();
    for &(l, h) in &support {
        if a.max_on(l, h).1 <= tol.zero {
            continue;
        }
        if l == h {
            witness.push((l, h));
            continue;
        }
        for &(ol, oh) in &omega {
            let (wl, wh) = (l.max(ol), h.min(oh));
            if wl < wh {
                witness.push((wl, wh));
            }
        }
    }
    if !witness.is_empty() {
        return FateClass { tag: FateTag::Persistence, witness, margin: None };
    }

    // largest and smallest growth rate over the initial zero set
    let (mut best_x, mut best) = (f64::NAN, f64::NEG_INFINITY);
    let mut worst = f64::INFINITY;
    for &(l, h) in &zero_set {
        let (x, v) = a.max_on(l, h);
        if v > best {
            best = v;
            best_x = x;
        }
        worst = worst.min(a.min_on(l, h).1);
    }
    if zero_set.is_empty() {
        return FateClass { tag: FateTag::Unclassified, witness: Vec::new(), margin: None };
    }
    let point = vec![(best_x, best_x)];
    if best > tol.zero {
        return FateClass { tag: FateTag::Unclassified, witness: point, margin: None };
    }
    if worst >= -tol.zero {
        return FateClass { tag: FateTag::Critical, witness: zero_set, margin: None };
    }
    if best <= -tol.margin {
        return FateClass { tag: FateTag::ExtinctionInterval, witness: point, margin: Some(-best) };
    }
    FateClass { tag: FateTag::ExtinctionPoint, witness: point, margin: None }
}

/// Smallest competition level recorded on `[0, horizon]`.
pub fn numeric_persistence_floor(traj: &Trajectory, horizon: f64) -> f64 {
    traj.times
        .iter()
        .zip(&traj.i_level)
        .take_while(|(t, _)| **t <= horizon + 1e-12)
        .map(|(_, i)| *i)
        .fold(f64::INFINITY, f64::min)
}
