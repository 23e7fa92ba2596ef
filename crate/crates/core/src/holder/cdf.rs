use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{Error, Result};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

fn phi_density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// One-dimensional distribution function on the extended real line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MarginalCdf {
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, sd: f64 },
    /// Empirical distribution of a sample, stored sorted.
    Empirical { sorted: Vec<f64> },
}

impl MarginalCdf {
    pub fn uniform01() -> Self {
        MarginalCdf::Uniform { lo: 0.0, hi: 1.0 }
    }

    pub fn standard_normal() -> Self {
        MarginalCdf::Gaussian { mean: 0.0, sd: 1.0 }
    }

    /// Empirical CDF of `sample`; non-finite values are rejected.
    pub fn empirical(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() || sample.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("empirical CDF needs a non-empty finite sample"));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(MarginalCdf::Empirical { sorted })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MarginalCdf::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                Err(Error::param(format!("uniform bounds must satisfy lo < hi, got [{lo}, {hi}]")))
            }
            MarginalCdf::Gaussian { mean, sd } if !(mean.is_finite() && *sd > 0.0 && sd.is_finite()) => {
                Err(Error::param(format!("gaussian needs finite mean and sd > 0, got ({mean}, {sd})")))
            }
            MarginalCdf::Empirical { sorted } if sorted.is_empty() => {
                Err(Error::param("empty empirical sample"))
            }
            _ => Ok(()),
        }
    }

    /// Whether the distribution function has no jumps.
    pub fn is_continuous(&self) -> bool {
        !matches!(self, MarginalCdf::Empirical { .. })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            MarginalCdf::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            MarginalCdf::Gaussian { mean, sd } => {
                if x == f64::INFINITY {
                    1.0
                } else if x == f64::NEG_INFINITY {
                    0.0
                } else {
                    std_normal().cdf((x - mean) / sd)
                }
            }
            MarginalCdf::Empirical { sorted } => {
                sorted.partition_point(|v| *v <= x) as f64 / sorted.len() as f64
            }
        }
    }

    /// `w_F(delta) = sup{|F(t) - F(s)| : |t - s| <= delta}`.
    pub fn modulus(&self, delta: f64) -> Result<f64> {
        if !(delta >= 0.0) {
            return Err(Error::param(format!("modulus needs delta >= 0, got {delta}")));
        }
        if delta == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            MarginalCdf::Uniform { lo, hi } => (delta / (hi - lo)).min(1.0),
            MarginalCdf::Gaussian { sd, .. } => {
                if delta.is_infinite() {
                    1.0
                } else {
                    2.0 * std_normal().cdf(delta / (2.0 * sd)) - 1.0
                }
            }
            MarginalCdf::Empirical { sorted } => {
                // Largest number of sample points in a window [x_i, x_i + delta).
                let mut best = 0usize;
                let mut hi = 0usize;
                for lo in 0..sorted.len() {
                    hi = hi.max(lo);
                    while hi < sorted.len() && sorted[hi] - sorted[lo] < delta {
                        hi += 1;
                    }
                    best = best.max(hi - lo);
                }
                best as f64 / sorted.len() as f64
            }
        })
    }

    /// `w_F^<-(y) = inf{delta > 0 : w_F(delta) >= y}`; `+inf` when no such delta.
    pub fn modulus_inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() {
            return Err(Error::param("NaN level"));
        }
        if y <= 0.0 {
            return Ok(0.0);
        }
        if y > 1.0 {
            return Ok(f64::INFINITY);
        }
        Ok(match self {
            MarginalCdf::Uniform { lo, hi } => y * (hi - lo),
            MarginalCdf::Gaussian { sd, .. } => {
                if y >= 1.0 {
                    f64::INFINITY
                } else {
                    2.0 * sd * std_normal().inverse_cdf((1.0 + y) / 2.0)
                }
            }
            MarginalCdf::Empirical { sorted } => {
                let n = sorted.len();
                let k = ((y * n as f64) - 1e-9).ceil().max(1.0) as usize;
                if k > n {
                    f64::INFINITY
                } else {
                    // A window [x_i, x_i + delta) holds k points once delta > x_{i+k-1} - x_i.
                    (0..=n - k).map(|i| sorted[i + k - 1] - sorted[i]).fold(f64::INFINITY, f64::min)
                }
            }
        })
    }

    /// `F^->(y) = sup{x in [-inf, inf] : F(x) <= y}`.
    pub fn generalized_inverse(&self, y: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::param(format!("level must lie in [0, 1], got {y}")));
        }
        if y == 1.0 {
            return Ok(f64::INFINITY);
        }
        Ok(match self {
            MarginalCdf::Uniform { lo, hi } => lo + y * (hi - lo),
            MarginalCdf::Gaussian { mean, sd } => {
                if y == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    mean + sd * std_normal().inverse_cdf(y)
                }
            }
            MarginalCdf::Empirical { sorted } => {
                let n = sorted.len();
                let k = ((y * n as f64) + 1e-9).floor() as usize;
                if k >= n {
                    f64::INFINITY
                } else {
                    sorted[k]
                }
            }
        })
    }

    /// `G(x) = integral of F over (-inf, x]`, used for bump expectations.
    pub(crate) fn integrated_cdf(&self, x: f64) -> f64 {
        match self {
            MarginalCdf::Uniform { lo, hi } => {
                let w = hi - lo;
                if x <= *lo {
                    0.0
                } else if x <= *hi {
                    (x - lo).powi(2) / (2.0 * w)
                } else {
                    w / 2.0 + (x - hi)
                }
            }
            MarginalCdf::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                sd * (z * std_normal().cdf(z) + phi_density(z))
            }
            MarginalCdf::Empirical { sorted } => {
                sorted.iter().map(|v| (x - v).max(0.0)).sum::<f64>() / sorted.len() as f64
            }
        }
    }

    /// `E ramp((X - b) / (b - a))` for `X` with this law, following the
    /// infinite-corner convention of [`HolderBump`](super::HolderBump).
    pub fn ramp_expectation(&self, a: f64, b: f64) -> f64 {
        if b == f64::INFINITY {
            1.0
        } else if a == f64::NEG_INFINITY {
            0.0
        } else {
            ((self.integrated_cdf(b) - self.integrated_cdf(a)) / (b - a)).clamp(0.0, 1.0)
        }
    }
}

/// Dependence structure between coordinates of `X_0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum JointLaw {
    /// Coordinates are independent.
    Independent,
    /// Joint law represented by a large stationary reference sample (row-major).
    Reference {
        #[serde(skip)]
        sample: Vec<f64>,
        draws: usize,
    },
}

/// Law of `X_0`: marginals plus a joint representation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdfModel {
    pub marginals: Vec<MarginalCdf>,
    pub joint: JointLaw,
    /// True when marginals come from a sample rather than closed forms.
    pub estimated: bool,
}

impl CdfModel {
    /// Independent coordinates with the given marginals.
    pub fn independent(marginals: Vec<MarginalCdf>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::param("at least one marginal required"));
        }
        for m in &marginals {
            m.validate()?;
        }
        let estimated = marginals.iter().any(|m| !m.is_continuous());
        Ok(CdfModel { marginals, joint: JointLaw::Independent, estimated })
    }

    /// `d` independent uniform `[0, 1]` coordinates.
    pub fn uniform01(d: usize) -> Self {
        CdfModel { marginals: vec![MarginalCdf::uniform01(); d], joint: JointLaw::Independent, estimated: false }
    }

    /// Joint law from a row-major reference sample. Marginals are the given
    /// closed forms when supplied, otherwise the empirical ones.
    pub fn from_reference(sample: Vec<f64>, d: usize, marginals: Option<Vec<MarginalCdf>>) -> Result<Self> {
        if d == 0 || sample.is_empty() || !sample.len().is_multiple_of(d) {
            return Err(Error::Shape("reference sample does not form rows of width d".into()));
        }
        let draws = sample.len() / d;
        let (marginals, estimated) = match marginals {
            Some(m) if m.len() == d => (m, false),
            Some(m) => return Err(Error::Shape(format!("{} marginals for dimension {d}", m.len()))),
            None => (
                (0..d)
                    .map(|j| MarginalCdf::empirical(&sample.iter().skip(j).step_by(d).copied().collect::<Vec<_>>()))
                    .collect::<Result<Vec<_>>>()?,
                true,
            ),
        };
        Ok(CdfModel { marginals, joint: JointLaw::Reference { sample, draws }, estimated })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn reference_sample(&self) -> Option<&[f64]> {
        match &self.joint {
            JointLaw::Reference { sample, .. } => Some(sample),
            JointLaw::Independent => None,
        }
    }

    /// Joint distribution function at `t`.
    pub fn cdf(&self, t: &[f64]) -> f64 {
        match &self.joint {
            JointLaw::Independent => self.marginals.iter().zip(t).map(|(m, x)| m.cdf(*x)).product(),
            JointLaw::Reference { sample, draws } => {
                let d = self.dim();
                sample.chunks_exact(d).filter(|r| r.iter().zip(t).all(|(a, b)| a <= b)).count() as f64
                    / *draws as f64
            }
        }
    }

    /// Upper bound `min(sum_i w_{F_i}(delta), 1)` on the joint modulus.
    pub fn joint_modulus_bound(&self, delta: f64) -> Result<f64> {
        let mut s = 0.0;
        for m in &self.marginals {
            s += m.modulus(delta)?;
        }
        Ok(s.min(1.0))
    }

    /// Expectation of `f(X_0)`: exact under independence for product
    /// functions is handled by callers; this is the sample average over the
    /// reference draws, or `None` without a reference.
    pub fn reference_mean<F: Fn(&[f64]) -> f64>(&self, f: F) -> Option<f64> {
        let sample = self.reference_sample()?;
        let d = self.dim();
        Some(sample.chunks_exact(d).map(f).sum::<f64>() / (sample.len() / d) as f64)
    }
}
