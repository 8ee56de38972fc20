use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Uniform 1-D discretization of a truncated trait domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraitGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dx: f64,
}

impl TraitGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self, ModelError> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(ModelError::InvalidGrid(format!("need finite x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_points < 3 {
            return Err(ModelError::InvalidGrid(format!("need at least 3 nodes, got {n_points}")));
        }
        let dx = (x_max - x_min) / (n_points - 1) as f64;
        Ok(Self { x_min, x_max, n_points, dx })
    }

    /// Grid with spacing `dx` (the node count is rounded to the nearest integer).
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self, ModelError> {
        if !(dx > 0.0) {
            return Err(ModelError::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        let cells = ((x_max - x_min) / dx).round();
        if !(cells >= 2.0) {
            return Err(ModelError::InvalidGrid(format!("dx = {dx} too coarse for [{x_min}, {x_max}]")));
        }
        Self::new(x_min, x_max, cells as usize + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Trapezoid weights: `dx/2` at the two ends, `dx` inside.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.dx; self.n_points];
        w[0] *= 0.5;
        w[self.n_points - 1] *= 0.5;
        w
    }

    /// Trapezoid quadrature of nodal values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let n = values.len();
        let inner: f64 = values[1..n - 1].iter().sum();
        self.dx * (inner + 0.5 * (values[0] + values[n - 1]))
    }
}
