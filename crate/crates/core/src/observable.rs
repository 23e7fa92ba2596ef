//! Real functions `f` of one observation, as used by the dependence and CLT
//! routines, with their sup and Hölder bounds and reference moments.

use serde::{Deserialize, Serialize};

use crate::holder::{CdfModel, HolderBump, JointLaw};
use crate::processes::LinearProcess;
use crate::rng;
use crate::{Error, Result};

/// Draws in a reference sample used for means and `r`-norms.
pub const REFERENCE_DRAWS: usize = 1_000_000;
/// Largest `|E f(X_0)|` accepted for a function declared centered.
pub const CENTERING_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Observable {
    Zero,
    /// `x -> x_index` (unbounded).
    Coordinate { index: usize },
    Bump { bump: HolderBump },
    /// `phi_plus - phi_minus`.
    BumpDifference { plus: HolderBump, minus: HolderBump },
    /// `sum_k w_k phi_k`.
    Combination { weights: Vec<f64>, bumps: Vec<HolderBump> },
    /// `inner - shift`.
    Shifted { inner: Box<Observable>, shift: f64 },
}

impl Observable {
    pub fn bump(bump: HolderBump) -> Self {
        Observable::Bump { bump }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let check = |b: &HolderBump| {
            if b.dim() == d {
                Ok(())
            } else {
                Err(Error::Shape(format!("bump of dimension {} for observations in dimension {d}", b.dim())))
            }
        };
        match self {
            Observable::Zero => Ok(()),
            Observable::Coordinate { index } if *index >= d => {
                Err(Error::Shape(format!("coordinate {index} out of range for dimension {d}")))
            }
            Observable::Coordinate { .. } => Ok(()),
            Observable::Bump { bump } => check(bump),
            Observable::BumpDifference { plus, minus } => check(plus).and(check(minus)),
            Observable::Combination { weights, bumps } => {
                if weights.len() != bumps.len() {
                    return Err(Error::Shape("weights and bumps differ in length".into()));
                }
                bumps.iter().try_for_each(check)
            }
            Observable::Shifted { inner, shift } => {
                if !shift.is_finite() {
                    return Err(Error::param("shift must be finite"));
                }
                inner.validate(d)
            }
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Observable::Zero => 0.0,
            Observable::Coordinate { index } => x[*index],
            Observable::Bump { bump } => bump.eval(x),
            Observable::BumpDifference { plus, minus } => plus.eval(x) - minus.eval(x),
            Observable::Combination { weights, bumps } => {
                weights.iter().zip(bumps).map(|(w, b)| w * b.eval(x)).sum()
            }
            Observable::Shifted { inner, shift } => inner.eval(x) - shift,
        }
    }

    /// Bound on `sup |f|`, `None` when unbounded.
    pub fn sup_bound(&self) -> Option<f64> {
        match self {
            Observable::Zero => Some(0.0),
            Observable::Coordinate { .. } => None,
            Observable::Bump { .. } => Some(1.0),
            Observable::BumpDifference { .. } => Some(1.0),
            Observable::Combination { weights, .. } => Some(weights.iter().map(|w| w.abs()).sum()),
            Observable::Shifted { inner, shift } => match inner.as_ref() {
                // A bump minus c stays within [-c, 1-c].
                Observable::Bump { .. } => Some(shift.abs().max((1.0 - shift).abs())),
                other => other.sup_bound().map(|s| s + shift.abs()),
            },
        }
    }

    /// Bound on the Hölder seminorm, `None` when unknown.
    pub fn seminorm_bound(&self) -> Option<f64> {
        match self {
            Observable::Zero => Some(0.0),
            Observable::Coordinate { .. } => None,
            Observable::Bump { bump } => Some(bump.seminorm_bound()),
            Observable::BumpDifference { plus, minus } => Some(plus.seminorm_bound() + minus.seminorm_bound()),
            Observable::Combination { weights, bumps } => {
                Some(weights.iter().zip(bumps).map(|(w, b)| w.abs() * b.seminorm_bound()).sum())
            }
            Observable::Shifted { inner, .. } => inner.seminorm_bound(),
        }
    }

    /// Bound on the Hölder norm (sup bound plus seminorm bound).
    pub fn holder_norm_bound(&self) -> Option<f64> {
        Some(self.sup_bound()? + self.seminorm_bound()?)
    }

    /// `E f(X_0)` in closed form for bump-based observables under a law with
    /// independent coordinates.
    pub fn exact_mean(&self, law: &CdfModel) -> Option<f64> {
        if law.joint != JointLaw::Independent {
            return None;
        }
        match self {
            Observable::Zero => Some(0.0),
            Observable::Coordinate { .. } => None,
            Observable::Bump { bump } => bump.expectation(law).ok(),
            Observable::BumpDifference { plus, minus } => {
                Some(plus.expectation(law).ok()? - minus.expectation(law).ok()?)
            }
            Observable::Combination { weights, bumps } => weights
                .iter()
                .zip(bumps)
                .map(|(w, b)| b.expectation(law).ok().map(|e| w * e))
                .sum(),
            Observable::Shifted { inner, shift } => inner.exact_mean(law).map(|m| m - shift),
        }
    }

    /// `f - c`.
    pub fn shifted(self, shift: f64) -> Self {
        if shift == 0.0 {
            return self;
        }
        match self {
            Observable::Shifted { inner, shift: s } => Observable::Shifted { inner, shift: s + shift },
            other => Observable::Shifted { inner: Box::new(other), shift },
        }
    }
}

/// Seed of the reference path attached to a master seed.
pub fn reference_seed(seed: u64) -> u64 {
    rng::replicate_seed(seed ^ 0x5eed_5eed_5eed_5eed, u64::MAX)
}

/// Mean and `r`-norm of `f(X_0)` over a long stationary reference path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceStats {
    pub mean: f64,
    /// Standard error of the mean ignoring serial dependence.
    pub naive_se: f64,
    pub r: f64,
    /// `||f(X_0) - mean||_r` estimate.
    pub centered_r_norm: f64,
    /// `||f(X_0)||_r` estimate.
    pub r_norm: f64,
    pub draws: usize,
}

pub fn reference_stats(process: &LinearProcess, f: &Observable, r: f64, draws: usize, seed: u64) -> Result<ReferenceStats> {
    if !(r >= 1.0) {
        return Err(Error::param(format!("r must be >= 1, got {r}")));
    }
    f.validate(process.d())?;
    let path = process.simulate(draws, reference_seed(seed))?;
    let vals: Vec<f64> = path.rows().map(|x| f.eval(x)).collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let r_norm = (vals.iter().map(|v| v.abs().powf(r)).sum::<f64>() / n).powf(1.0 / r);
    let centered_r_norm = (vals.iter().map(|v| (v - mean).abs().powf(r)).sum::<f64>() / n).powf(1.0 / r);
    Ok(ReferenceStats { mean, naive_se: (var / n).sqrt(), r, centered_r_norm, r_norm, draws })
}

/// Centers `f` with its exact mean when available, otherwise with the
/// reference-path mean. Returns the centered observable and the mean used.
pub fn center(process: &LinearProcess, law: Option<&CdfModel>, f: Observable, seed: u64) -> Result<(Observable, f64, bool)> {
    if let Some(m) = law.and_then(|l| f.exact_mean(l)) {
        return Ok((f.shifted(m), m, true));
    }
    let stats = reference_stats(process, &f, 1.0, REFERENCE_DRAWS, seed)?;
    Ok((f.shifted(stats.mean), stats.mean, false))
}

/// `E f(X_0)` in closed form when the process is scalar with closed-form
/// marginals and `f` is bump-based.
pub fn exact_process_mean(process: &LinearProcess, f: &Observable) -> Option<f64> {
    if process.d() != 1 {
        return None;
    }
    let law = CdfModel::independent(process.analytic_marginals()?).ok()?;
    f.exact_mean(&law)
}

/// Mean of `f(X_0)`: closed form when available, otherwise the reference-path
/// mean. The flag tells which.
pub fn best_mean(process: &LinearProcess, f: &Observable, stats: &ReferenceStats) -> (f64, bool) {
    match exact_process_mean(process, f) {
        Some(m) => (m, true),
        None => (stats.mean, false),
    }
}

/// Fails with [`Error::Contract`] when `|E f(X_0)|` exceeds
/// [`CENTERING_TOLERANCE`]. Uses the closed-form mean when available and the
/// reference mean otherwise.
pub fn require_centered(process: &LinearProcess, f: &Observable, stats: &ReferenceStats) -> Result<f64> {
    let (mean, exact) = best_mean(process, f, stats);
    if mean.abs() > CENTERING_TOLERANCE {
        let source = if exact { "closed-form mean".to_string() } else { format!("reference mean over {} draws", stats.draws) };
        return Err(Error::Contract(format!(
            "observable is not centered: {source} {mean} exceeds {CENTERING_TOLERANCE}"
        )));
    }
    Ok(mean)
}
