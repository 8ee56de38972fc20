use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// One constant-environment stretch starting at `t_start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    /// Index into the growth-model table (0-based).
    pub model: usize,
}

/// Piecewise-constant environment `t -> model index`, optionally periodic.
///
/// Switch instants belong to the segment that starts there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSchedule {
    segments: Vec<Segment>,
    period: Option<f64>,
}

impl EnvironmentSchedule {
    pub fn new(segments: Vec<Segment>, period: Option<f64>) -> Result<Self, ModelError> {
        let first = segments.first().ok_or_else(|| ModelError::InvalidSchedule("no segments".into()))?;
        if first.t_start != 0.0 {
            return Err(ModelError::InvalidSchedule(format!("first segment must start at 0, got {}", first.t_start)));
        }
        if segments.iter().any(|s| !s.t_start.is_finite()) {
            return Err(ModelError::InvalidSchedule("non-finite segment start".into()));
        }
        if let Some(w) = segments.windows(2).find(|w| w[1].t_start <= w[0].t_start) {
            return Err(ModelError::InvalidSchedule(format!(
                "segment starts must increase strictly ({} then {})",
                w[0].t_start, w[1].t_start
            )));
        }
        if let Some(p) = period {
            if !(p > 0.0 && p.is_finite()) {
                return Err(ModelError::InvalidSchedule(format!("period must be positive, got {p}")));
            }
            let last = segments.last().unwrap().t_start;
            if last >= p {
                return Err(ModelError::InvalidSchedule(format!("segment start {last} does not fit in period {p}")));
            }
        }
        Ok(Self { segments, period })
    }

    /// A single environment for all times.
    pub fn constant(model: usize) -> Self {
        Self { segments: vec![Segment { t_start: 0.0, model }], period: None }
    }

    /// Two environments alternating every half period: `model_a` on `[0, T/2)`, `model_b` on `[T/2, T)`.
    pub fn alternating(model_a: usize, model_b: usize, period: f64) -> Result<Self, ModelError> {
        Self::new(
            vec![Segment { t_start: 0.0, model: model_a }, Segment { t_start: 0.5 * period, model: model_b }],
            Some(period),
        )
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn model_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.segments.iter().map(|s| s.model)
    }

    /// Model index active at time `t` (right-continuous).
    pub fn model_at(&self, t: f64) -> usize {
        // instants within roundoff of a switch belong to the segment starting there
        let tol = 1e-12 * t.abs().max(1.0);
        let local = match self.period {
            Some(p) => {
                let r = t.rem_euclid(p);
                if p - r <= tol {
                    0.0
                } else {
                    r
                }
            }
            None => t,
        };
        self.segments.iter().rev().find(|s| s.t_start <= local + tol).unwrap_or(&self.segments[0]).model
    }

    /// Switch instants in `(0, t_end)` where the active model may change, in order.
    pub fn switch_times(&self, t_end: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match self.period {
            None => out.extend(self.segments[1..].iter().map(|s| s.t_start).filter(|&t| t < t_end)),
            Some(p) => {
                let mut k = 0u64;
                loop {
                    let base = k as f64 * p;
                    if base >= t_end {
                        break;
                    }
                    for (j, s) in self.segments.iter().enumerate() {
                        if k == 0 && j == 0 {
                            continue;
                        }
                        let t = base + s.t_start;
                        if t < t_end {
                            out.push(t);
                        }
                    }
                    k += 1;
                }
            }
        }
        out
    }

    /// Same switching pattern stretched to a new period.
    pub fn with_period(&self, period: f64) -> Result<Self, ModelError> {
        let old =
            self.period.ok_or_else(|| ModelError::InvalidSchedule("only periodic schedules can be rescaled".into()))?;
        let scale = period / old;
        Self::new(
            self.segments.iter().map(|s| Segment { t_start: s.t_start * scale, model: s.model }).collect(),
            Some(period),
        )
    }
}
