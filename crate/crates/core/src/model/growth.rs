//! Growth-rate families `R(x, I) = a(x) - k I`, their structural bounds, and the
//! consumption weight `psi` that defines the competition integral.

use serde::{Deserialize, Serialize};

use super::{Polynomial, TraitGrid};
use crate::error::ModelError;

/// Growth rate of trait `x` under competition level `I`.
///
/// Every form is a polynomial in `x` with an affine, strictly decreasing dependence on `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GrowthModel {
    /// `R(x, I) = a(x) - I`.
    SeparableAffine { a: Polynomial },
    /// `R(x, I) = r - g (x - theta)^2 - I`, with `g > 0`.
    QuadraticConcave { r: f64, g: f64, theta: f64 },
    /// `R(x, I) = a(x) - competition * I`, with `competition > 0`.
    Custom { a: Polynomial, competition: f64 },
}

impl GrowthModel {
    pub fn separable(a: Polynomial) -> Result<Self, ModelError> {
        Self::SeparableAffine { a }.validated()
    }

    pub fn quadratic(r: f64, g: f64, theta: f64) -> Result<Self, ModelError> {
        Self::QuadraticConcave { r, g, theta }.validated()
    }

    pub fn custom(a: Polynomial, competition: f64) -> Result<Self, ModelError> {
        Self::Custom { a, competition }.validated()
    }

    pub fn validated(self) -> Result<Self, ModelError> {
        match &self {
            GrowthModel::SeparableAffine { a } => {
                if !a.is_finite() {
                    return Err(ModelError::InvalidModel("non-finite coefficient".into()));
                }
            }
            GrowthModel::QuadraticConcave { r, g, theta } => {
                if !(r.is_finite() && theta.is_finite() && g.is_finite()) {
                    return Err(ModelError::InvalidModel("non-finite parameter".into()));
                }
                if *g <= 0.0 {
                    return Err(ModelError::InvalidModel(format!("need g > 0, got {g}")));
                }
            }
            GrowthModel::Custom { a, competition } => {
                if !a.is_finite() {
                    return Err(ModelError::InvalidModel("non-finite coefficient".into()));
                }
                if !(*competition > 0.0 && competition.is_finite()) {
                    return Err(ModelError::InvalidModel(format!(
                        "competition coefficient must be positive, got {competition}"
                    )));
                }
            }
        }
        Ok(self)
    }

    /// The trait-only part `a(x) = R(x, 0)` as a polynomial.
    pub fn trait_part(&self) -> Polynomial {
        match self {
            GrowthModel::SeparableAffine { a } | GrowthModel::Custom { a, .. } => a.clone(),
            GrowthModel::QuadraticConcave { r, g, theta } => {
                Polynomial::new(vec![r - g * theta * theta, 2.0 * g * theta, -g])
            }
        }
    }

    /// `-dR/dI`.
    pub fn competition(&self) -> f64 {
        match self {
            GrowthModel::Custom { competition, .. } => *competition,
            _ => 1.0,
        }
    }

    #[inline]
    pub fn rate(&self, x: f64, i: f64) -> f64 {
        match self {
            GrowthModel::SeparableAffine { a } => a.eval(x) - i,
            GrowthModel::QuadraticConcave { r, g, theta } => {
                let d = x - theta;
                r - g * d * d - i
            }
            GrowthModel::Custom { a, competition } => a.eval(x) - competition * i,
        }
    }

    /// `d/dx R(x, I)`; independent of `I` for every supported form.
    pub fn rate_gradient(&self, x: f64, _i: f64) -> f64 {
        match self {
            GrowthModel::QuadraticConcave { g, theta, .. } => -2.0 * g * (x - theta),
            GrowthModel::SeparableAffine { a } | GrowthModel::Custom { a, .. } => a.derivative().eval(x),
        }
    }

    /// `d2/dx2 R(x, I)`.
    pub fn rate_curvature(&self, x: f64, _i: f64) -> f64 {
        match self {
            GrowthModel::QuadraticConcave { g, .. } => -2.0 * g,
            GrowthModel::SeparableAffine { a } | GrowthModel::Custom { a, .. } => a.derivative().derivative().eval(x),
        }
    }

    /// Competition level `I >= 0` solving `R(x, I) = 0`, if any.
    pub fn viable_level(&self, x: f64) -> Option<f64> {
        let a = self.rate(x, 0.0);
        (a >= 0.0).then(|| a / self.competition())
    }

    /// Nodal values of `a(x_i)`; the solver forms `R_i = a_i - k I` from these.
    pub fn trait_profile(&self, grid: &TraitGrid) -> Vec<f64> {
        grid.nodes().map(|x| self.rate(x, 0.0)).collect()
    }

    /// Constant curvature bounds `-2 K2_lower <= D2R <= -2 K2_upper` on `[lo, hi]`, when concave there.
    pub fn curvature_range(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let d2 = self.trait_part().derivative().derivative();
        let (_, max) = d2.max_on(lo, hi);
        let (_, min) = d2.min_on(lo, hi);
        (max < 0.0).then(|| (-0.5 * min, -0.5 * max))
    }
}

/// Structural constants of a growth model on a truncated domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBounds {
    /// Upper bound of `R` for `0 <= I <= 2 I_M`.
    pub k0: f64,
    /// `-K1 <= dR/dI <= -1/K1`.
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// Competition level at which the best trait stops growing.
    pub i_max: f64,
    /// Whether `max_x R(x, I_M) = 0` holds (otherwise `i_max` is an operational cap).
    pub i_max_from_root: bool,
}

impl GrowthBounds {
    /// Computes the bounds on `grid`. `fallback_cap` is used as `I_M` when no trait is viable.
    pub fn compute(model: &GrowthModel, grid: &TraitGrid, fallback_cap: f64) -> Self {
        let a = model.trait_part();
        let k = model.competition();
        let (_, amax) = a.max_on(grid.x_min(), grid.x_max());
        let (i_max, i_max_from_root) = if amax > 0.0 { (amax / k, true) } else { (fallback_cap, false) };
        // R is decreasing in I, so the extremes over I in [0, 2 I_M] sit at the ends.
        let k0 = grid.nodes().map(|x| model.rate(x, 0.0)).fold(f64::NEG_INFINITY, f64::max).max(amax);
        let k3 = 1.0;
        let k2 = grid.nodes().map(|x| -model.rate(x, 2.0 * i_max) - k3 * x * x).fold(0.0, f64::max);
        Self { k0, k1: k.max(1.0 / k), k2, k3, i_max, i_max_from_root }
    }
}

/// Concavity constants of the growth rate and the initial Hopf-Cole profile.
///
/// `-2 K2_lower <= D2R <= -2 K2_upper` and `-2 L1_lower <= D2u0 <= -2 L1_upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcavityConstants {
    pub k2_lower: f64,
    pub k2_upper: f64,
    pub l1_lower: f64,
    pub l1_upper: f64,
}

impl ConcavityConstants {
    pub fn new(k2_lower: f64, k2_upper: f64, l1_lower: f64, l1_upper: f64) -> Result<Self, ModelError> {
        let all_pos = [k2_lower, k2_upper, l1_lower, l1_upper].iter().all(|v| *v > 0.0 && v.is_finite());
        if !all_pos {
            return Err(ModelError::InvalidConstants("all constants must be positive".into()));
        }
        if k2_upper > k2_lower || l1_upper > l1_lower {
            return Err(ModelError::InvalidConstants(format!(
                "need K2_upper <= K2_lower and L1_upper <= L1_lower, got ({k2_upper}, {k2_lower}), ({l1_upper}, {l1_lower})"
            )));
        }
        Ok(Self { k2_lower, k2_upper, l1_lower, l1_upper })
    }

    /// Constants for a model concave on `[lo, hi]` and a quadratic initial profile of curvature `-m0`.
    pub fn for_model(model: &GrowthModel, lo: f64, hi: f64, m0: f64) -> Result<Self, ModelError> {
        let (k2_lower, k2_upper) = model
            .curvature_range(lo, hi)
            .ok_or_else(|| ModelError::InvalidConstants("growth rate is not strictly concave on the domain".into()))?;
        Self::new(k2_lower, k2_upper, 0.5 * m0, 0.5 * m0)
    }

    /// `min(2 L1_upper, sqrt(K2_upper))`: lower curvature bound along the limit dynamics.
    pub fn curvature_floor(&self) -> f64 {
        (2.0 * self.l1_upper).min(self.k2_upper.sqrt())
    }

    /// `max(2 L1_lower, sqrt(K2_lower))`.
    pub fn curvature_ceiling(&self) -> f64 {
        (2.0 * self.l1_lower).max(self.k2_lower.sqrt())
    }
}

/// Trait-dependent consumption rate `psi` entering `I = integral psi n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConsumptionWeight {
    Constant(f64),
    PolynomialPositive(Polynomial),
}

impl Default for ConsumptionWeight {
    fn default() -> Self {
        ConsumptionWeight::Constant(1.0)
    }
}

impl ConsumptionWeight {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ConsumptionWeight::Constant(c) => *c,
            ConsumptionWeight::PolynomialPositive(p) => p.eval(x),
        }
    }

    /// `(psi_m, psi_M)` over the grid nodes.
    pub fn bounds_on(&self, grid: &TraitGrid) -> (f64, f64) {
        grid.nodes()
            .map(|x| self.eval(x))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Nodal values, checked to be strictly positive and finite.
    pub fn on_grid(&self, grid: &TraitGrid) -> Result<Vec<f64>, ModelError> {
        let values: Vec<f64> = grid.nodes().map(|x| self.eval(x)).collect();
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(ModelError::InvalidWeight(format!(
                "psi must be positive and finite, got {v} at x = {}",
                grid.x(i)
            )));
        }
        Ok(values)
    }

    pub fn is_constant(&self) -> Option<f64> {
        match self {
            ConsumptionWeight::Constant(c) => Some(*c),
            ConsumptionWeight::PolynomialPositive(p) if p.degree() == 0 => Some(p.coeffs()[0]),
            _ => None,
        }
    }
}
