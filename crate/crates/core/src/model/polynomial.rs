//! Dense real polynomials with exact derivatives and bracketed root isolation.

use serde::{Deserialize, Serialize};

/// Polynomial stored with ascending coefficients: `c[0] + c[1] x + c[2] x^2 + ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `scale * prod (x - r_i)`, expanded.
    pub fn from_roots(scale: f64, roots: &[f64]) -> Self {
        let mut coeffs = vec![scale];
        for &r in roots {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= r * c;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Horner evaluation.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(0.0);
        }
        let coeffs: Vec<f64> = self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
        Self::new(coeffs)
    }

    pub fn add_constant(&self, c: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += c;
        Self::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    /// Cauchy bound: every real root lies in `[-B, B]`.
    pub fn root_bound(&self) -> f64 {
        let lead = *self.coeffs.last().unwrap();
        if self.degree() == 0 || lead == 0.0 {
            return 0.0;
        }
        1.0 + self.coeffs[..self.degree()].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max)
    }

    /// Points in the open interval `(lo, hi)` where the derivative vanishes, sorted.
    pub fn critical_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.degree() <= 1 {
            return Vec::new();
        }
        self.derivative().roots_in(lo, hi)
    }

    /// Real roots in `[lo, hi]`, sorted and deduplicated.
    ///
    /// The interval is cut at the critical points so the polynomial is monotone on
    /// every piece; each sign change is then refined by bisection to machine precision.
    /// Double roots are picked up when they sit on a critical point.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if !(lo <= hi) {
            return Vec::new();
        }
        if self.degree() == 0 {
            return Vec::new();
        }
        let mut cuts = vec![lo];
        cuts.extend(self.critical_points(lo, hi));
        cuts.push(hi);

        let mut roots: Vec<f64> = Vec::new();
        for &c in &cuts {
            if self.eval(c) == 0.0 {
                roots.push(c);
            }
        }
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa != 0.0 && fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
                roots.push(bisect(|x| self.eval(x), a, b, fa));
            }
        }
        // critical points that touch zero within roundoff count as (double) roots
        let scale = self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1.0);
        for &c in &cuts[1..cuts.len() - 1] {
            if self.eval(c).abs() <= 1e-14 * scale {
                roots.push(c);
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));
        roots
    }

    /// All real roots.
    pub fn real_roots(&self) -> Vec<f64> {
        let b = self.root_bound();
        self.roots_in(-b, b)
    }

    /// Maximum over the closed interval `[lo, hi]`, with its location.
    pub fn max_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut best = (lo, self.eval(lo));
        let mut consider = |x: f64| {
            let v = self.eval(x);
            if v > best.1 {
                best = (x, v);
            }
        };
        for c in self.critical_points(lo, hi) {
            consider(c);
        }
        consider(hi);
        best
    }

    /// Minimum over the closed interval `[lo, hi]`, with its location.
    pub fn min_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (x, v) = self.scale(-1.0).max_on(lo, hi);
        (x, -v)
    }
}

/// Bisection on a bracket with a known sign change, run until the bracket stops shrinking.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg_at_a = fa < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
