use serde::{Deserialize, Serialize};

use super::TraitGrid;
use crate::error::ModelError;

/// Total mass of an initial component, either fixed or proportional to `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mass {
    Fixed(f64),
    /// `coefficient * eps`; vanishes in the small-mutation limit.
    PerEpsilon(f64),
}

impl Mass {
    pub fn value(&self, eps: f64) -> f64 {
        match *self {
            Mass::Fixed(m) => m,
            Mass::PerEpsilon(c) => c * eps,
        }
    }

    /// Whether the component keeps positive mass as `eps -> 0`.
    pub fn persists(&self) -> bool {
        matches!(self, Mass::Fixed(_))
    }

    fn check(&self) -> Result<(), ModelError> {
        let v = match *self {
            Mass::Fixed(m) => m,
            Mass::PerEpsilon(c) => c,
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(ModelError::InvalidInitial(format!("mass must be positive, got {v}")))
        }
    }
}

/// Initial density `n^0_eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialCondition {
    /// `mass / (c - b)` on `[b, c]`.
    Box {
        b: f64,
        c: f64,
        mass: Mass,
    },
    /// `mass / sqrt(2 pi eps) * exp(-(x - center)^2 / (2 eps))`.
    Gaussian {
        center: f64,
        mass: Mass,
    },
    /// `mass g^{1/4} / sqrt(2 pi eps) * exp(-sqrt(g) (x - center)^2 / (2 eps))`.
    GroundStateGaussian {
        g: f64,
        center: f64,
        mass: Mass,
    },
    Mixture(Vec<InitialCondition>),
}

/// Limit (`eps -> 0`) geometry of an initial condition as closed intervals `[lo, hi]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LimitSupport {
    /// Support of the weak limit of `n^0_eps` (components with persistent mass).
    pub support: Vec<(f64, f64)>,
    /// Zero set of the limit of `u^0_eps = eps ln n^0_eps`.
    pub zero_set: Vec<(f64, f64)>,
}

impl InitialCondition {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            InitialCondition::Box { b, c, mass } => {
                if !(b.is_finite() && c.is_finite() && b < c) {
                    return Err(ModelError::InvalidInitial(format!("box needs b < c, got [{b}, {c}]")));
                }
                mass.check()
            }
            InitialCondition::Gaussian { center, mass } => {
                if !center.is_finite() {
                    return Err(ModelError::InvalidInitial("non-finite center".into()));
                }
                mass.check()
            }
            InitialCondition::GroundStateGaussian { g, center, mass } => {
                if !(*g > 0.0 && g.is_finite() && center.is_finite()) {
                    return Err(ModelError::InvalidInitial(format!(
                        "ground state needs g > 0 and a finite center, got g = {g}"
                    )));
                }
                mass.check()
            }
            InitialCondition::Mixture(parts) => {
                if parts.is_empty() {
                    return Err(ModelError::InvalidInitial("empty mixture".into()));
                }
                parts.iter().try_for_each(|p| {
                    if matches!(p, InitialCondition::Mixture(_)) {
                        Err(ModelError::InvalidInitial("nested mixtures are not supported".into()))
                    } else {
                        p.validate()
                    }
                })
            }
        }
    }

    /// Samples the density on `grid`, renormalizing Gaussian kinds to their requested mass.
    pub fn sample(&self, grid: &TraitGrid, eps: f64) -> Result<Vec<f64>, ModelError> {
        self.sample_with(grid, eps, true)
    }

    /// Samples the density; with `renormalize = false` Gaussians are evaluated pointwise.
    ///
    /// Box components are cell-averaged (`n_i` = mean over `[x_i - dx/2, x_i + dx/2]`), so
    /// their trapezoid mass is exact whenever the box lies inside the domain.
    pub fn sample_with(&self, grid: &TraitGrid, eps: f64, renormalize: bool) -> Result<Vec<f64>, ModelError> {
        if !(eps > 0.0) {
            return Err(ModelError::InvalidInitial(format!("eps must be positive, got {eps}")));
        }
        self.validate()?;
        let mut n = vec![0.0; grid.n_points()];
        self.accumulate(grid, eps, renormalize, &mut n)?;
        Ok(n)
    }

    fn accumulate(&self, grid: &TraitGrid, eps: f64, renormalize: bool, out: &mut [f64]) -> Result<(), ModelError> {
        let outside = |lo: f64, hi: f64| hi < grid.x_min() || lo > grid.x_max();
        match self {
            InitialCondition::Box { b, c, mass } => {
                if outside(*b, *c) {
                    return Err(ModelError::InvalidInitial(format!("box [{b}, {c}] lies outside the domain")));
                }
                let height = mass.value(eps) / (c - b);
                let half = 0.5 * grid.dx();
                for (i, x) in grid.nodes().enumerate() {
                    let overlap = ((x + half).min(*c) - (x - half).max(*b)).max(0.0);
                    out[i] += height * overlap / grid.dx();
                }
            }
            InitialCondition::Gaussian { center, mass } => {
                gaussian_into(grid, eps, *center, 1.0, mass.value(eps), renormalize, out)?;
            }
            InitialCondition::GroundStateGaussian { g, center, mass } => {
                gaussian_into(grid, eps, *center, g.sqrt(), mass.value(eps), renormalize, out)?;
            }
            InitialCondition::Mixture(parts) => {
                for p in parts {
                    p.accumulate(grid, eps, renormalize, out)?;
                }
            }
        }
        Ok(())
    }

    /// Support and zero set of the `eps -> 0` limit.
    pub fn limit_support(&self) -> LimitSupport {
        let mut out = LimitSupport::default();
        self.collect_support(&mut out);
        out
    }

    fn collect_support(&self, out: &mut LimitSupport) {
        let (interval, mass) = match self {
            InitialCondition::Box { b, c, mass } => ((*b, *c), mass),
            InitialCondition::Gaussian { center, mass }
            | InitialCondition::GroundStateGaussian { center, mass, .. } => ((*center, *center), mass),
            InitialCondition::Mixture(parts) => {
                parts.iter().for_each(|p| p.collect_support(out));
                return;
            }
        };
        out.zero_set.push(interval);
        if mass.persists() {
            out.support.push(interval);
        }
    }

    /// Same condition with every persistent mass multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        let scale = |m: &Mass| match m {
            Mass::Fixed(v) => Mass::Fixed(v * factor),
            other => *other,
        };
        match self {
            InitialCondition::Box { b, c, mass } => InitialCondition::Box { b: *b, c: *c, mass: scale(mass) },
            InitialCondition::Gaussian { center, mass } => {
                InitialCondition::Gaussian { center: *center, mass: scale(mass) }
            }
            InitialCondition::GroundStateGaussian { g, center, mass } => {
                InitialCondition::GroundStateGaussian { g: *g, center: *center, mass: scale(mass) }
            }
            InitialCondition::Mixture(parts) => {
                InitialCondition::Mixture(parts.iter().map(|p| p.rescaled(factor)).collect())
            }
        }
    }

    /// Center and curvature `-D2u0` of a single Gaussian kind.
    pub fn gaussian_shape(&self) -> Option<(f64, f64)> {
        match self {
            InitialCondition::Gaussian { center, .. } => Some((*center, 1.0)),
            InitialCondition::GroundStateGaussian { g, center, .. } => Some((*center, g.sqrt())),
            _ => None,
        }
    }
}

/// Adds `mass * sqrt(s) / sqrt(2 pi eps) * exp(-s (x - c)^2 / (2 eps))`.
fn gaussian_into(
    grid: &TraitGrid,
    eps: f64,
    center: f64,
    stiffness: f64,
    mass: f64,
    renormalize: bool,
    out: &mut [f64],
) -> Result<(), ModelError> {
    let prefactor = mass * stiffness.sqrt() / (2.0 * std::f64::consts::PI * eps).sqrt();
    let values: Vec<f64> = grid
        .nodes()
        .map(|x| {
            let d = x - center;
            prefactor * (-stiffness * d * d / (2.0 * eps)).exp()
        })
        .collect();
    let scale = if renormalize {
        let m = grid.integrate(&values);
        if !(m > 0.0) {
            return Err(ModelError::InvalidInitial(format!("Gaussian centered at {center} has no mass on the grid")));
        }
        mass / m
    } else {
        1.0
    };
    for (o, v) in out.iter_mut().zip(values) {
        *o += scale * v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TraitGrid {
        TraitGrid::new(-2.0, 2.0, 4001).unwrap()
    }

    #[test]
    fn box_mass_is_exact_for_interior_boxes() {
        let g = grid();
        let ic = InitialCondition::Box { b: -0.6, c: -0.4, mass: Mass::Fixed(0.2) };
        let n = ic.sample(&g, 1e-3).unwrap();
        assert!(n.iter().all(|v| *v >= 0.0));
        let m = g.integrate(&n);
        assert!((m - 0.2).abs() <= 4e-4, "{m}");
        assert!((m - 0.2).abs() < 1e-12, "{m}");
        // unaligned edges
        let ic = InitialCondition::Box { b: -0.61234, c: 0.4321, mass: Mass::Fixed(1.0) };
        let m = g.integrate(&ic.sample(&g, 1e-3).unwrap());
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_renormalized_to_mass() {
        let g = grid();
        let ic = InitialCondition::Gaussian { center: 0.0, mass: Mass::Fixed(0.2) };
        let m = g.integrate(&ic.sample(&g, 1e-3).unwrap());
        assert!((m - 0.2).abs() < 1e-14);
    }

    #[test]
    fn ground_state_peak() {
        let g = grid();
        let eps = 1e-3;
        let ic = InitialCondition::GroundStateGaussian { g: 1.0, center: 0.0, mass: Mass::Fixed(0.25) };
        let n = ic.sample(&g, eps).unwrap();
        let peak = n.iter().cloned().fold(0.0, f64::max);
        let expected = 0.25 / (2.0 * std::f64::consts::PI * eps).sqrt();
        assert!((peak / expected - 1.0).abs() < 1e-6);
        let raw = ic.sample_with(&g, eps, false).unwrap();
        assert_eq!(raw[2000], expected);
    }

    #[test]
    fn ground_state_stiffness() {
        let g = grid();
        let eps = 1e-3;
        let ic = InitialCondition::GroundStateGaussian { g: 4.0, center: 0.5, mass: Mass::Fixed(1.0) };
        let n = ic.sample_with(&g, eps, false).unwrap();
        // u = eps ln n has curvature -sqrt(g) = -2
        let i = 2500;
        let u = |k: usize| eps * n[k].ln();
        let d2 = (u(i - 1) - 2.0 * u(i) + u(i + 1)) / (g.dx() * g.dx());
        assert!((d2 + 2.0).abs() < 1e-6, "{d2}");
    }

    #[test]
    fn rejects_support_outside_domain() {
        let g = grid();
        let ic = InitialCondition::Box { b: 3.0, c: 4.0, mass: Mass::Fixed(1.0) };
        assert!(ic.sample(&g, 1e-3).is_err());
        let ic = InitialCondition::Gaussian { center: 10.0, mass: Mass::Fixed(1.0) };
        assert!(ic.sample(&g, 1e-3).is_err());
        let ic = InitialCondition::Box { b: 0.0, c: 0.0, mass: Mass::Fixed(1.0) };
        assert!(ic.validate().is_err());
    }

    #[test]
    fn mixture_limit_geometry() {
        let ic = InitialCondition::Mixture(vec![
            InitialCondition::Gaussian { center: -0.75, mass: Mass::Fixed(0.2) },
            InitialCondition::Gaussian { center: 0.0, mass: Mass::PerEpsilon(1.0) },
        ]);
        let s = ic.limit_support();
        assert_eq!(s.support, vec![(-0.75, -0.75)]);
        assert_eq!(s.zero_set, vec![(-0.75, -0.75), (0.0, 0.0)]);
        let g = grid();
        let m = g.integrate(&ic.sample(&g, 1e-3).unwrap());
        assert!((m - 0.201).abs() < 1e-12);
    }
}
