use serde::Serialize;

use crate::observable::{reference_stats, require_centered, Observable, REFERENCE_DRAWS};
use crate::processes::{LinearProcess, ProcessSpec};
use crate::{rng, Error, Result};

/// Largest lag examined when the cutoff is chosen from the data.
pub const MAX_AUTO_LAG: usize = 100;
/// Consecutive small autocorrelations that end the lag window.
const QUIET_LAGS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaEstimate {
    /// `gamma(0) + 2 sum_{h=1}^{L} gamma(h)`, floored at zero.
    pub sigma2: f64,
    pub se: f64,
    pub lag_cutoff: usize,
    /// Cutoff chosen from the autocorrelations rather than supplied.
    pub auto_cutoff: bool,
    /// No quiet window was found below the largest examined lag.
    pub cutoff_capped: bool,
    /// The plug-in sum was negative and was set to zero.
    pub floored: bool,
    /// Replicate-averaged `gamma(h)` for `h = 0..`.
    pub autocovariances: Vec<f64>,
    pub n: usize,
    pub reps: usize,
}

/// `(1/n) sum_i v_i v_{i+h}` for `h = 0..=max_lag`.
pub(crate) fn autocovariances(v: &[f64], max_lag: usize) -> Vec<f64> {
    let n = v.len() as f64;
    (0..=max_lag.min(v.len() - 1))
        .map(|h| v.iter().zip(&v[h..]).map(|(a, b)| a * b).sum::<f64>() / n)
        .collect()
}

/// Smallest `L` such that `|rho(L+1)|, ..., |rho(L+5)|` are all below `threshold`.
/// Returns the largest available lag and `true` when no such window exists.
pub fn choose_lag_cutoff(gamma: &[f64], threshold: f64) -> (usize, bool) {
    let max_lag = gamma.len().saturating_sub(1);
    if gamma.is_empty() || gamma[0] <= 0.0 {
        return (0, false);
    }
    for start in 1..=max_lag.saturating_sub(QUIET_LAGS - 1) {
        if (start..start + QUIET_LAGS).all(|h| (gamma[h] / gamma[0]).abs() < threshold) {
            return (start - 1, false);
        }
    }
    (max_lag, true)
}

/// Combines per-replicate autocovariance vectors into a variance estimate.
pub(crate) fn sigma_from_replicates(per_rep: &[Vec<f64>], lag: Option<usize>, n: usize) -> SigmaEstimate {
    let reps = per_rep.len();
    let width = per_rep.iter().map(Vec::len).min().unwrap_or(0);
    let gamma: Vec<f64> = (0..width).map(|h| per_rep.iter().map(|g| g[h]).sum::<f64>() / reps as f64).collect();
    let (lag_cutoff, cutoff_capped) = match lag {
        Some(l) => (l.min(width.saturating_sub(1)), false),
        None => choose_lag_cutoff(&gamma, 2.0 / ((n * reps) as f64).sqrt()),
    };
    let plug = |g: &[f64]| g[0] + 2.0 * g[1..=lag_cutoff].iter().sum::<f64>();
    let per: Vec<f64> = per_rep.iter().map(|g| plug(g)).collect();
    let (raw, se) = crate::dependence::mean_se(&per);
    SigmaEstimate {
        sigma2: raw.max(0.0),
        se,
        lag_cutoff,
        auto_cutoff: lag.is_none(),
        cutoff_capped,
        floored: raw < 0.0,
        autocovariances: gamma,
        n,
        reps,
    }
}

/// Truncated plug-in estimate of `sigma_f^2 = E f(X_0)^2 + 2 sum_i E f(X_0) f(X_i)`
/// from `reps` paths of length `n`. `lag = None` picks the cutoff from the data.
pub fn sigma_f_estimate(spec: &ProcessSpec, f: &Observable, lag: Option<usize>, n: usize, reps: usize, seed: u64) -> Result<SigmaEstimate> {
    if n < 2 || reps < 2 {
        return Err(Error::param("need n >= 2 and at least two replicates"));
    }
    let process = LinearProcess::new(spec.clone())?;
    f.validate(process.d())?;
    let stats = reference_stats(&process, f, 1.0, REFERENCE_DRAWS, seed)?;
    require_centered(&process, f, &stats)?;
    let max_lag = lag.unwrap_or(MAX_AUTO_LAG).min(n - 1);
    let per_rep = rng::replicates(reps, seed, |_, sd| {
        let path = process.simulate(n, sd)?;
        let v: Vec<f64> = path.rows().map(|x| f.eval(x)).collect();
        Ok(autocovariances(&v, max_lag))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(sigma_from_replicates(&per_rep, lag, n))
}

/// Independent replicates of `n^{-1/2} sum_{i=1}^n f(X_i)`.
pub fn normalized_sums(spec: &ProcessSpec, f: &Observable, n: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    if reps < 100 {
        return Err(Error::param(format!("at least 100 replicates are needed, got {reps}")));
    }
    if n == 0 {
        return Err(Error::param("path length must be positive"));
    }
    let process = LinearProcess::new(spec.clone())?;
    f.validate(process.d())?;
    let rn = (n as f64).sqrt();
    rng::replicates(reps, seed, |_, sd| {
        let path = process.simulate(n, sd)?;
        Ok(path.rows().map(|x| f.eval(x)).sum::<f64>() / rn)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holder::HolderBump;
    use crate::processes::{CoefficientModel, InnovationLaw};

    fn centered_bump() -> Observable {
        Observable::bump(HolderBump::from_corners(&[-0.5], &[0.5], 1.0).unwrap()).shifted(0.5)
    }

    #[test]
    fn iid_variance_and_zero_cutoff() {
        let spec = ProcessSpec::iid(InnovationLaw::Uniform);
        let f = centered_bump();
        // Var f(X) for X uniform on (-sqrt 3, sqrt 3): f - 1/2 is +-1/2 outside
        // (-1/2, 1/2) and -x inside.
        let h = 3f64.sqrt();
        let var = (0.25 * (2.0 * (h - 0.5)) + 2.0 * 0.5f64.powi(3) / 3.0) / (2.0 * h);
        let est = sigma_f_estimate(&spec, &f, None, 500, 400, 2).unwrap();
        assert!((est.sigma2 - var).abs() < 3.0 * est.se, "{} vs {var}", est.sigma2);
        let zero = sigma_f_estimate(&spec, &f, Some(0), 500, 400, 2).unwrap();
        assert_eq!(zero.sigma2, zero.autocovariances[0]);
        assert!(!zero.auto_cutoff);
    }

    #[test]
    fn dependent_variance_matches_replicates() {
        let spec = ProcessSpec::scalar(InnovationLaw::Rademacher, CoefficientModel::geometric(0.5, 1.0, None));
        let f = centered_bump();
        let est = sigma_f_estimate(&spec, &f, Some(30), 5000, 200, 4).unwrap();
        let sums = normalized_sums(&spec, &f, 5000, 2000, 5).unwrap();
        let var = sums.iter().map(|s| s * s).sum::<f64>() / sums.len() as f64;
        assert!((var / est.sigma2 - 1.0).abs() < 0.1, "{var} vs {}", est.sigma2);
    }

    #[test]
    fn cutoff_rule() {
        let gamma = [1.0, 0.5, 0.2, 0.001, 0.001, 0.001, 0.001, 0.001, 0.3];
        assert_eq!(choose_lag_cutoff(&gamma, 0.01), (2, false));
        assert_eq!(choose_lag_cutoff(&gamma[..6], 0.01), (5, true));
    }

    #[test]
    fn normalized_sum_edge_cases() {
        let spec = ProcessSpec::iid(InnovationLaw::Rademacher);
        let zeros = normalized_sums(&spec, &Observable::Zero, 10, 100, 1).unwrap();
        assert!(zeros.iter().all(|v| *v == 0.0));
        let signs = normalized_sums(&spec, &Observable::Coordinate { index: 0 }, 1, 100, 1).unwrap();
        assert!(signs.iter().all(|v| v.abs() == 1.0));
        assert!(normalized_sums(&spec, &Observable::Zero, 10, 99, 1).is_err());
    }

    #[test]
    fn uncentered_rejected() {
        let spec = ProcessSpec::iid(InnovationLaw::Uniform);
        let f = Observable::bump(HolderBump::from_corners(&[-0.5], &[0.5], 1.0).unwrap());
        assert!(matches!(sigma_f_estimate(&spec, &f, None, 100, 10, 1), Err(Error::Contract(_))));
    }
}
