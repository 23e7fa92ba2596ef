use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::mean_se;
use crate::observable::{best_mean, reference_stats, Observable, REFERENCE_DRAWS};
use crate::processes::{LinearProcess, ProcessSpec};
use crate::{rng, Error, Result};

/// Rate functions `Phi_i = Phi^{kappa_i}` of the moment bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RateFamily {
    /// `Phi_i(x) = x^i`.
    Power,
    /// `Phi_i(x) = log(x + 1)^{kappa_i}`.
    Log {
        #[serde(default)]
        kappas: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingCheck {
    pub z0: f64,
    /// `sup_{z >= z0} Phi(2z) / Phi(z)` over a logarithmic grid.
    pub lambda: f64,
}

impl RateFamily {
    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            RateFamily::Power => Ok(()),
            RateFamily::Log { kappas: None } => Err(Error::param("log rate family needs exponents kappa_1..kappa_p")),
            RateFamily::Log { kappas: Some(k) } => {
                if k.len() != p {
                    return Err(Error::param(format!("expected {p} exponents, got {}", k.len())));
                }
                if k.iter().any(|v| !(*v >= 0.0)) {
                    return Err(Error::param("exponents must be nonnegative"));
                }
                Ok(())
            }
        }
    }

    /// Base function `Phi`.
    pub fn base(&self, x: f64) -> f64 {
        match self {
            RateFamily::Power => x,
            RateFamily::Log { .. } => (x + 1.0).ln(),
        }
    }

    /// `Phi_i(x)` for `i >= 1`.
    pub fn phi(&self, i: usize, x: f64) -> f64 {
        match self {
            RateFamily::Power => x.powi(i as i32),
            RateFamily::Log { kappas } => {
                let k = kappas.as_ref().map_or(i as f64, |k| k[i - 1]);
                (x + 1.0).ln().powf(k)
            }
        }
    }

    /// Checks `Phi(2z) <= lambda Phi(z)` for `z >= z0` and reports the smallest such lambda
    /// seen on `[z0, 1e6 z0]`.
    pub fn doubling_check(&self, z0: f64) -> Result<DoublingCheck> {
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(Error::param("z0 must be positive"));
        }
        let lambda = (0..=600)
            .map(|k| z0 * 10f64.powf(k as f64 / 100.0))
            .map(|z| self.base(2.0 * z) / self.base(z))
            .fold(0.0, f64::max);
        Ok(DoublingCheck { z0, lambda })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentParams {
    pub n_list: Vec<usize>,
    pub p: usize,
    pub r: f64,
    pub family: RateFamily,
    pub reps: usize,
    #[serde(default = "default_reference_draws")]
    pub reference_draws: usize,
}

fn default_reference_draws() -> usize {
    REFERENCE_DRAWS
}

/// Monte Carlo `E S_n^k` with its standard error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub n: usize,
    pub power: u32,
    pub mean: f64,
    pub se: f64,
    pub reps: usize,
}

/// `E (sum_{i=1}^n g(X_i))^power`, or of its absolute value, from `reps` paths.
pub fn partial_sum_moment(
    process: &LinearProcess,
    g: &Observable,
    n: usize,
    power: u32,
    absolute: bool,
    reps: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    if reps < 2 {
        return Err(Error::param("at least two replicates are needed"));
    }
    g.validate(process.d())?;
    let draws = rng::replicates(reps, seed, |_, sd| {
        let path = process.simulate(n, sd)?;
        let sum: f64 = path.rows().map(|x| g.eval(x)).sum();
        Ok(if absolute { sum.abs().powi(power as i32) } else { sum.powi(power as i32) })
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let (mean, se) = mean_se(&draws);
    Ok(MomentEstimate { n, power, mean, se, reps })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub n: usize,
    pub moment: f64,
    pub se: f64,
    /// `sum_i n^i ||f - Ef||_r^i Phi_i(||f - Ef||)`.
    pub bound_sum: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub p: usize,
    pub r: f64,
    pub family: RateFamily,
    pub mean: f64,
    pub centered_r_norm: f64,
    pub centered_holder_norm: f64,
    pub rows: Vec<MomentRow>,
    /// Smallest `C` for which the bound holds at every `n` of the list.
    pub fitted_c: f64,
    /// Fitted `C` over the first `k` entries, `k = 1..`.
    pub running_c: Vec<f64>,
    /// OLS slope of `log ratio` on `log n` and its standard error.
    pub slope: Option<f64>,
    pub slope_se: Option<f64>,
    /// One-sided test at 95% that the ratio grows with `n`.
    pub growth_detected: bool,
    pub doubling: DoublingCheck,
}

/// Monte Carlo `E|sum (f(X_i) - Ef)|^{2p}` against the rate bound for every `n`.
pub fn moment_bound_check(spec: &ProcessSpec, f: &Observable, params: &MomentParams, seed: u64) -> Result<MomentReport> {
    let MomentParams { n_list, p, r, family, reps, reference_draws } = params;
    let p = *p;
    if p == 0 {
        return Err(Error::param("p must be at least 1"));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::param("n list must be nonempty with positive entries"));
    }
    family.validate(p)?;
    match f.sup_bound() {
        Some(b) if b <= 1.0 + 1e-12 => {}
        _ => return Err(Error::param("observable must be bounded by 1 in sup norm")),
    }
    let process = LinearProcess::new(spec.clone())?;
    let stats = reference_stats(&process, f, *r, *reference_draws, seed)?;
    let (mean, _) = best_mean(&process, f, &stats);
    let g = f.clone().shifted(mean);
    let h = g.holder_norm_bound().ok_or_else(|| Error::param("observable has no Hölder norm bound"))?;
    let rn = stats.centered_r_norm;

    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let est = partial_sum_moment(&process, &g, n, 2 * p as u32, true, *reps, rng::replicate_seed(seed, n as u64))?;
        let nf = n as f64;
        let bound_sum: f64 = (1..=p).map(|i| (nf * rn).powi(i as i32) * family.phi(i, h)).sum();
        rows.push(MomentRow { n, moment: est.mean, se: est.se, bound_sum, ratio: est.mean / bound_sum });
    }
    let running_c: Vec<f64> = rows
        .iter()
        .scan(0.0f64, |acc, row| {
            *acc = acc.max(row.ratio);
            Some(*acc)
        })
        .collect();
    let fitted_c = *running_c.last().unwrap();
    let (slope, slope_se, growth_detected) = growth_test(&rows);
    Ok(MomentReport {
        p,
        r: *r,
        family: family.clone(),
        mean,
        centered_r_norm: rn,
        centered_holder_norm: h,
        rows,
        fitted_c,
        running_c,
        slope,
        slope_se,
        growth_detected,
        doubling: family.doubling_check(1.0)?,
    })
}

fn growth_test(rows: &[MomentRow]) -> (Option<f64>, Option<f64>, bool) {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ratio > 0.0)
        .map(|r| ((r.n as f64).ln(), r.ratio.ln()))
        .collect();
    let k = pts.len();
    if k < 3 {
        return (None, None, false);
    }
    let kf = k as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return (None, None, false);
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let se = (rss / (kf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, kf - 2.0).map(|d| d.inverse_cdf(0.95)).unwrap_or(f64::INFINITY);
    let growth = slope - t * se > 0.0;
    (Some(slope), Some(se), growth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holder::HolderBump;
    use crate::processes::{CoefficientModel, InnovationLaw};

    fn bump() -> Observable {
        Observable::bump(HolderBump::from_corners(&[-0.5], &[0.5], 1.0).unwrap())
    }

    #[test]
    fn iid_second_moment_is_linear_in_n() {
        let spec = ProcessSpec::iid(InnovationLaw::StandardNormal);
        let params = MomentParams {
            n_list: vec![10, 20, 40, 80],
            p: 1,
            r: 2.0,
            family: RateFamily::Power,
            reps: 20_000,
            reference_draws: REFERENCE_DRAWS,
        };
        let rep = moment_bound_check(&spec, &bump(), &params, 3).unwrap();
        // E S_n^2 = n Var f, bound_sum = n ||f - Ef||_2 ||f - Ef||_H, so the ratio is constant.
        let want = rep.centered_r_norm / rep.centered_holder_norm;
        for row in &rep.rows {
            assert!((row.ratio - want).abs() < 4.0 * row.se / row.bound_sum + 0.01 * want, "{row:?}");
        }
        assert!(!rep.growth_detected);
        assert_eq!(rep.doubling.lambda, 2.0);
    }

    #[test]
    fn dependent_fitted_constant_has_no_trend() {
        let spec = ProcessSpec::scalar(InnovationLaw::Rademacher, CoefficientModel::geometric(0.5, 1.0, None));
        let params = MomentParams {
            n_list: vec![16, 32, 64, 128],
            p: 2,
            r: 2.0,
            family: RateFamily::Power,
            reps: 8000,
            reference_draws: 200_000,
        };
        let rep = moment_bound_check(&spec, &bump(), &params, 11).unwrap();
        assert!(!rep.growth_detected, "{rep:?}");
        assert!(rep.running_c.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn log_family_needs_exponents() {
        assert!(RateFamily::Log { kappas: None }.validate(2).is_err());
        assert!(RateFamily::Log { kappas: Some(vec![1.0]) }.validate(2).is_err());
        let fam = RateFamily::Log { kappas: Some(vec![3.0, 2.0]) };
        fam.validate(2).unwrap();
        assert!((fam.phi(1, 1.0) - 2f64.ln().powi(3)).abs() < 1e-15);
        let dc = fam.doubling_check(1.0).unwrap();
        assert!((dc.lambda - 3f64.ln() / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn phi_is_nondecreasing() {
        let fam = RateFamily::Log { kappas: Some(vec![0.5, 1.0, 2.0]) };
        for i in 1..=3 {
            for k in 0..100 {
                let x = k as f64 * 0.1;
                assert!(fam.phi(i, x) <= fam.phi(i, x + 0.1));
                assert!(RateFamily::Power.phi(i, x) <= RateFamily::Power.phi(i, x + 0.1));
            }
        }
    }
}
