use serde::{Deserialize, Serialize};

use super::delta::estimate_with;
use super::mean_se;
use crate::observable::{reference_stats, require_centered, Observable, REFERENCE_DRAWS};
use crate::processes::{LinearProcess, ProcessSpec};
use crate::{rng, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingParams {
    /// Gaps `i_1, ..., i_p` between consecutive observation times.
    pub gaps: Vec<usize>,
    /// Number of factors in the left block, counting `f(X_0)`.
    pub split: usize,
    pub r: f64,
    /// Moment order of the dependence coefficient in `Theta(i) = delta_{i,s}^alpha`.
    pub s: f64,
    pub alpha: f64,
    pub reps: usize,
    /// Draws in the reference path used for centering and the `r`-norm.
    #[serde(default = "default_reference_draws")]
    pub reference_draws: usize,
}

fn default_reference_draws() -> usize {
    REFERENCE_DRAWS
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaSource {
    /// Linear-filter bound on `delta`.
    Analytic,
    /// Coupled Monte Carlo estimate of `delta`.
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingReport {
    pub gaps: Vec<usize>,
    pub split: usize,
    /// Observation times `0, i_1*, ..., i_p*`.
    pub times: Vec<usize>,
    pub covariance: f64,
    pub se: f64,
    pub ci: [f64; 2],
    pub ci_width: f64,
    /// Gap between the two blocks, `i_q`.
    pub block_gap: usize,
    pub theta: f64,
    pub theta_source: ThetaSource,
    pub f_r_norm: f64,
    pub f_holder_norm: f64,
    /// `||f(X_0)||_r ||f|| Theta(i_q)`; the claimed bound is `K_p` times this.
    pub bound_unit: f64,
    /// `|covariance| / bound_unit`, absent when the unit vanishes.
    pub fitted_k: Option<f64>,
    /// `E f(X_0)` used by the centering check.
    pub mean: f64,
    pub reps: usize,
}

impl MixingReport {
    /// `K * bound_unit`.
    pub fn bound(&self, k: f64) -> f64 {
        k * self.bound_unit
    }

    /// Whether `|covariance| <= k * bound_unit + z * se`.
    pub fn within(&self, k: f64, z: f64) -> bool {
        self.covariance.abs() <= self.bound(k) + z * self.se
    }
}

/// Covariance of `f(X_0) f(X_{i_1*}) ... f(X_{i_{q-1}*})` and
/// `f(X_{i_q*}) ... f(X_{i_p*})` from independent replicates.
pub fn mixing_covariance_estimate(spec: &ProcessSpec, f: &Observable, params: &MixingParams, seed: u64) -> Result<MixingReport> {
    let MixingParams { gaps, split, r, s, alpha, reps, reference_draws } = params;
    let (split, reps) = (*split, *reps);
    if gaps.is_empty() || split == 0 || split > gaps.len() {
        return Err(Error::param(format!("split must lie in 1..={} for {} gaps", gaps.len(), gaps.len())));
    }
    if reps < 2 {
        return Err(Error::param("at least two replicates are needed"));
    }
    if !(*alpha > 0.0 && *alpha <= 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    match f.sup_bound() {
        Some(b) if b <= 1.0 + 1e-12 => {}
        _ => return Err(Error::param("observable must be bounded by 1 in sup norm")),
    }
    let f_holder_norm = f
        .holder_norm_bound()
        .ok_or_else(|| Error::param("observable has no Hölder norm bound"))?;
    let process = LinearProcess::new(spec.clone())?;
    f.validate(process.d())?;

    let stats = reference_stats(&process, f, *r, *reference_draws, seed)?;
    let mean = require_centered(&process, f, &stats)?;

    let mut times = vec![0usize];
    for g in gaps {
        times.push(times.last().unwrap() + g);
    }
    let len = times.last().unwrap() + 1;
    let pairs = rng::replicates(reps, seed, |_, sd| {
        let path = process.simulate(len, sd)?;
        let prod = |ts: &[usize]| ts.iter().map(|&t| f.eval(path.row(t))).product::<f64>();
        Ok((prod(&times[..split]), prod(&times[split..])))
    })
    .into_iter()
    .collect::<Result<Vec<(f64, f64)>>>()?;

    let nf = reps as f64;
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let z: Vec<f64> = pairs.iter().map(|(a, b)| (a - ma) * (b - mb)).collect();
    let (zbar, se) = mean_se(&z);
    let covariance = zbar * nf / (nf - 1.0);

    let block_gap = gaps[split - 1];
    let (delta, theta_source) = match spec.innovation.diff_norm_bound(*s, spec.q) {
        Ok(norm) => (super::delta_linear_bound(&spec.coefficients, block_gap, norm)?, ThetaSource::Analytic),
        Err(_) if block_gap == 0 => {
            return Err(Error::param("a zero block gap needs an analytic innovation difference norm"));
        }
        Err(_) => {
            let e = estimate_with(&process, block_gap, *s, reps, rng::replicate_seed(seed, u64::MAX - 1))?;
            (e.estimate, ThetaSource::MonteCarlo)
        }
    };
    let theta = delta.powf(*alpha);
    let bound_unit = stats.r_norm * f_holder_norm * theta;
    let fitted_k = (bound_unit > 0.0).then(|| covariance.abs() / bound_unit);
    Ok(MixingReport {
        gaps: gaps.clone(),
        split,
        times,
        covariance,
        se,
        ci: [covariance - 1.96 * se, covariance + 1.96 * se],
        ci_width: 2.0 * 1.96 * se,
        block_gap,
        theta,
        theta_source,
        f_r_norm: stats.r_norm,
        f_holder_norm,
        bound_unit,
        fitted_k,
        mean,
        reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holder::HolderBump;
    use crate::processes::{CoefficientModel, InnovationLaw};

    fn params(gaps: Vec<usize>, split: usize) -> MixingParams {
        MixingParams { gaps, split, r: 2.0, s: 2.0, alpha: 1.0, reps: 20_000, reference_draws: REFERENCE_DRAWS }
    }

    // Symmetric bump around 0 under a symmetric law has mean exactly 1/2.
    fn centered_bump() -> Observable {
        Observable::bump(HolderBump::from_corners(&[-0.5], &[0.5], 1.0).unwrap()).shifted(0.5)
    }

    #[test]
    fn iid_blocks_are_uncorrelated() {
        let spec = ProcessSpec::iid(InnovationLaw::Uniform);
        for (gaps, split) in [(vec![1], 1), (vec![0, 2, 1], 2)] {
            let rep = mixing_covariance_estimate(&spec, &centered_bump(), &params(gaps, split), 5).unwrap();
            assert!(rep.covariance.abs() < 3.0 * rep.se, "{rep:?}");
            assert_eq!(rep.bound_unit, 0.0);
            assert_eq!(rep.fitted_k, None);
        }
    }

    #[test]
    fn lag_covariance_matches_direct_estimate() {
        let spec = ProcessSpec::scalar(InnovationLaw::StandardNormal, CoefficientModel::geometric(0.5, 1.0, None));
        let f = centered_bump();
        let rep = mixing_covariance_estimate(&spec, &f, &params(vec![1], 1), 7).unwrap();
        // Direct estimate from one long path: E f(X_0) f(X_1).
        let path = LinearProcess::new(spec.clone()).unwrap().simulate(400_000, 99).unwrap();
        let v: Vec<f64> = path.rows().map(|x| f.eval(x)).collect();
        let direct = v.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (v.len() - 1) as f64;
        assert!((rep.covariance - direct).abs() < 4.0 * rep.se + 0.002, "{} vs {direct}", rep.covariance);
        assert!(rep.covariance > 0.0);
        assert!(rep.within(rep.fitted_k.unwrap(), 0.0));
    }

    #[test]
    fn uncentered_observable_rejected() {
        let spec = ProcessSpec::iid(InnovationLaw::Uniform);
        let f = Observable::bump(HolderBump::from_corners(&[-0.5], &[0.5], 1.0).unwrap());
        let err = mixing_covariance_estimate(&spec, &f, &params(vec![1], 1), 1).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
        assert!(mixing_covariance_estimate(&spec, &centered_bump(), &params(vec![1], 2), 1).is_err());
    }
}
