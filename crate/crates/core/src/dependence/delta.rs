use serde::Serialize;

use super::mean_se;
use crate::processes::{CoefficientModel, LinearProcess, ProcessSpec};
use crate::{rng, Error, Result};

/// Monte Carlo estimate of `delta_{i,s} = (E|X_i - X'_i|^s)^{1/s}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaEstimate {
    pub lag: usize,
    pub s: f64,
    pub estimate: f64,
    pub se: f64,
    /// Mean of `|X_i - X'_i|^s` before taking the root.
    pub power_mean: f64,
    pub power_mean_se: f64,
    pub reps: usize,
}

fn euclid_pow(a: &[f64], b: &[f64], s: f64) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    sq.powf(s / 2.0)
}

pub(crate) fn estimate_with(process: &LinearProcess, lag: usize, s: f64, reps: usize, seed: u64) -> Result<DeltaEstimate> {
    if lag == 0 {
        return Err(Error::param("lag must be at least 1"));
    }
    if !(s >= 1.0) {
        return Err(Error::param(format!("moment order s must be >= 1, got {s}")));
    }
    if reps < 2 {
        return Err(Error::param("at least two replicates are needed"));
    }
    let law = &process.spec().innovation;
    if !law.has_finite_moment(s) {
        return Err(Error::Moment(format!("{law:?} has no finite moment of order {s}")));
    }
    // Time `lag` of a path whose innovations up to time 0 are swapped.
    let draws = rng::replicates(reps, seed, |_, sd| {
        let c = process.simulate_coupled(lag, 0, sd)?;
        Ok(euclid_pow(c.primary.row(lag - 1), c.shadow.row(lag - 1), s))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let (m, m_se) = mean_se(&draws);
    let (estimate, se) = if m > 0.0 { (m.powf(1.0 / s), m.powf(1.0 / s - 1.0) * m_se / s) } else { (0.0, 0.0) };
    Ok(DeltaEstimate { lag, s, estimate, se, power_mean: m, power_mean_se: m_se, reps })
}

/// Estimates `delta_{lag,s}` from `reps` coupled replicates.
pub fn delta_estimate(spec: &ProcessSpec, lag: usize, s: f64, reps: usize, seed: u64) -> Result<DeltaEstimate> {
    estimate_with(&LinearProcess::new(spec.clone())?, lag, s, reps, seed)
}

/// `xi_diff_norm * sum_{j >= lag} |a_j|`.
pub fn delta_linear_bound(coefficients: &CoefficientModel, lag: usize, xi_diff_norm: f64) -> Result<f64> {
    Ok(xi_diff_norm * coefficients.tail_norm_sum(lag)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DependenceProfile {
    pub s: f64,
    pub lags: Vec<usize>,
    pub estimates: Vec<DeltaEstimate>,
    /// Linear-filter bound per lag, when the innovation difference norm is known.
    pub analytic_bound: Option<Vec<f64>>,
    pub truncation_lag: usize,
}

impl DependenceProfile {
    /// Lags whose estimate exceeds the analytic bound by more than `k` standard errors.
    pub fn bound_violations(&self, k: f64) -> Vec<usize> {
        let Some(bound) = &self.analytic_bound else { return Vec::new() };
        self.estimates
            .iter()
            .zip(bound)
            .filter(|(e, b)| e.estimate > **b + k * e.se + 1e-12)
            .map(|(e, _)| e.lag)
            .collect()
    }
}

/// Estimates at every lag (replicate streams keyed by lag) alongside the analytic bound.
pub fn dependence_profile(spec: &ProcessSpec, lags: &[usize], s: f64, reps: usize, seed: u64) -> Result<DependenceProfile> {
    let process = LinearProcess::new(spec.clone())?;
    let estimates = lags
        .iter()
        .map(|&lag| estimate_with(&process, lag, s, reps, rng::replicate_seed(seed, lag as u64)))
        .collect::<Result<Vec<_>>>()?;
    let analytic_bound = match spec.innovation.diff_norm_bound(s, spec.q) {
        Ok(norm) => Some(
            lags.iter()
                .map(|&lag| delta_linear_bound(&spec.coefficients, lag, norm))
                .collect::<Result<Vec<_>>>()?,
        ),
        Err(_) => None,
    };
    Ok(DependenceProfile { s, lags: lags.to_vec(), estimates, analytic_bound, truncation_lag: process.lag() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::InnovationLaw;

    fn geometric(j: Option<usize>) -> ProcessSpec {
        ProcessSpec::scalar(InnovationLaw::Rademacher, CoefficientModel::geometric(0.5, 1.0, j))
    }

    #[test]
    fn zero_past_truncation_and_for_iid() {
        let e = delta_estimate(&geometric(Some(3)), 4, 2.0, 50, 1).unwrap();
        assert_eq!((e.estimate, e.se), (0.0, 0.0));
        let e = delta_estimate(&ProcessSpec::iid(InnovationLaw::StandardNormal), 1, 2.0, 50, 1).unwrap();
        assert_eq!(e.estimate, 0.0);
    }

    #[test]
    fn geometric_lag_three_under_bound() {
        let spec = geometric(None);
        let e = delta_estimate(&spec, 3, 2.0, 4000, 9).unwrap();
        let b = delta_linear_bound(&spec.coefficients, 3, 2f64.sqrt()).unwrap();
        assert!((b - 2f64.sqrt() * 0.25).abs() < 1e-6);
        assert!(e.estimate <= b + 3.0 * e.se, "{} vs {b}", e.estimate);
        // Exact value: E(X_3 - X'_3)^2 = 2 sum_{j>=3} rho^{2j}.
        let exact = (2.0 * (3..60).map(|j| 0.25f64.powi(j)).sum::<f64>()).sqrt();
        assert!((e.estimate - exact).abs() < 4.0 * e.se, "{} vs {exact}", e.estimate);
    }

    #[test]
    fn bound_tail_shapes() {
        let id = CoefficientModel::identity(1);
        assert_eq!(delta_linear_bound(&id, 0, 1.7).unwrap(), 1.7);
        assert_eq!(delta_linear_bound(&id, 1, 1.7).unwrap(), 0.0);
        let poly = CoefficientModel::polynomial(2.0, 1.0, None);
        let r = delta_linear_bound(&poly, 200, 1.0).unwrap() / delta_linear_bound(&poly, 100, 1.0).unwrap();
        assert!((r - 0.25).abs() < 0.01, "{r}");
        // Longer truncation never lowers the bound.
        let short = CoefficientModel::geometric(0.7, 1.0, Some(5));
        let long = CoefficientModel::geometric(0.7, 1.0, Some(9));
        for lag in 0..12 {
            assert!(delta_linear_bound(&short, lag, 1.0).unwrap() <= delta_linear_bound(&long, lag, 1.0).unwrap() + 1e-15);
        }
    }

    #[test]
    fn heavy_tails_rejected() {
        let spec = ProcessSpec::iid(InnovationLaw::Pareto { tail_index: 1.5 });
        assert!(matches!(delta_estimate(&spec, 1, 2.0, 10, 1), Err(Error::Moment(_))));
    }

    #[test]
    fn profile_flags_nothing_for_valid_bound() {
        let p = dependence_profile(&geometric(Some(6)), &[1, 2, 3, 7], 2.0, 2000, 4).unwrap();
        assert!(p.bound_violations(3.0).is_empty());
        assert_eq!(p.estimates[3].estimate, 0.0);
    }
}
