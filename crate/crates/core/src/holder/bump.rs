use serde::{Deserialize, Serialize};

use super::cdf::{CdfModel, JointLaw};
use super::point::ExtendedPoint;
use crate::{Error, Result};

/// `phi(x) = 1` for `x <= -1`, `-x` on `(-1, 0]`, `0` for `x > 0`.
#[inline]
pub fn ramp(x: f64) -> f64 {
    if x <= -1.0 {
        1.0
    } else if x <= 0.0 {
        // `0.0 - x` keeps ramp(0) = +0.
        0.0 - x
    } else {
        0.0
    }
}

/// Lipschitz bump `phi_(a,b)` squeezed between the indicators of the
/// orthants below `a` and below `b`.
///
/// Coordinate `i` contributes the factor `ramp((x_i - b_i) / (b_i - a_i))`
/// when both corners are finite, `1` when `b_i = +inf` and `0` when
/// `a_i = -inf < b_i < inf`. With those conventions the bump satisfies
/// `1_{x <= a} <= phi <= 1_{x <= b}` for every corner pair, including the
/// unbounded cells at the edges of a partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderBump {
    lower: ExtendedPoint,
    upper: ExtendedPoint,
    alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Factor {
    Ramp { b: f64, inv_width: f64 },
    One,
    Zero,
}

impl HolderBump {
    pub fn new(lower: ExtendedPoint, upper: ExtendedPoint, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if lower.dim() != upper.dim() {
            return Err(Error::Shape(format!("corners of dimension {} and {}", lower.dim(), upper.dim())));
        }
        if !lower.strictly_below(&upper) {
            return Err(Error::Corner(format!("need a < b in every coordinate, got a = {lower}, b = {upper}")));
        }
        Ok(HolderBump { lower, upper, alpha })
    }

    /// Convenience constructor from plain vectors.
    pub fn from_corners(lower: &[f64], upper: &[f64], alpha: f64) -> Result<Self> {
        Self::new(ExtendedPoint::new(lower.to_vec())?, ExtendedPoint::new(upper.to_vec())?, alpha)
    }

    pub fn lower(&self) -> &ExtendedPoint {
        &self.lower
    }

    pub fn upper(&self) -> &ExtendedPoint {
        &self.upper
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    fn factor(&self, i: usize) -> Factor {
        let (a, b) = (self.lower[i], self.upper[i]);
        if b == f64::INFINITY {
            Factor::One
        } else if a == f64::NEG_INFINITY {
            Factor::Zero
        } else {
            Factor::Ramp { b, inv_width: 1.0 / (b - a) }
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut v = 1.0;
        for (i, xi) in x.iter().enumerate() {
            v *= match self.factor(i) {
                Factor::Ramp { b, inv_width } => ramp((xi - b) * inv_width),
                Factor::One => 1.0,
                Factor::Zero => return 0.0,
            };
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }

    /// Largest `(b_i - a_i)^(-alpha)` over finite corner pairs; zero if none.
    fn max_inverse_width(&self) -> f64 {
        (0..self.dim())
            .filter_map(|i| match self.factor(i) {
                Factor::Ramp { inv_width, .. } => Some(inv_width.powf(self.alpha)),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    /// Bound `d * max_i (b_i - a_i)^(-alpha)` on the Hölder seminorm.
    pub fn seminorm_bound(&self) -> f64 {
        self.dim() as f64 * self.max_inverse_width()
    }

    /// Bound on the full Hölder norm: the seminorm bound plus the sup norm 1.
    pub fn holder_norm_bound(&self) -> f64 {
        self.seminorm_bound() + 1.0
    }

    /// `E phi(X_0)`: closed form for independent coordinates, reference
    /// sample average otherwise.
    pub fn expectation(&self, law: &CdfModel) -> Result<f64> {
        if law.dim() != self.dim() {
            return Err(Error::Shape(format!("law of dimension {} for a bump in dimension {}", law.dim(), self.dim())));
        }
        match law.joint {
            JointLaw::Independent => Ok((0..self.dim())
                .map(|i| law.marginals[i].ramp_expectation(self.lower[i], self.upper[i]))
                .product()),
            JointLaw::Reference { .. } => Ok(law.reference_mean(|x| self.eval(x)).expect("reference present")),
        }
    }

    /// Axis-aligned box that contains every point where the bump is not
    /// locally constant, widened by a quarter of each width. Infinite corners
    /// are replaced by a finite neighbour.
    #[cfg(test)]
    pub(crate) fn probe_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = Vec::with_capacity(self.dim());
        let mut hi = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let (a, b) = (self.lower[i], self.upper[i]);
            let (a, b) = match (a.is_finite(), b.is_finite()) {
                (true, true) => (a, b),
                (true, false) => (a, a + 1.0),
                (false, true) => (b - 1.0, b),
                (false, false) => (-1.0, 1.0),
            };
            let w = b - a;
            lo.push(a - w / 4.0);
            hi.push(b + w / 4.0);
        }
        (lo, hi)
    }
}
