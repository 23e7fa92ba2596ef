use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::{rng, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub ks: f64,
    pub threshold: f64,
    pub pass: bool,
    pub samples: usize,
}

/// `1.5 * 1.36 / sqrt(reps)`.
pub fn default_threshold(reps: usize) -> f64 {
    1.5 * 1.36 / (reps as f64).sqrt()
}

/// `sup_x |F_n(x) - G(x)|` for `G = N(0, sigma2)`, or the point mass at zero when `sigma2 = 0`.
pub fn ks_statistic(samples: &[f64], sigma2: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::param("no samples"));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(Error::param(format!("variance must be finite and nonnegative, got {sigma2}")));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("samples must be finite"));
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    // G(t) and G(t-).
    let (g, g_left): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = if sigma2 == 0.0 {
        (Box::new(|t| if t >= 0.0 { 1.0 } else { 0.0 }), Box::new(|t| if t > 0.0 { 1.0 } else { 0.0 }))
    } else {
        let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|e| Error::param(e.to_string()))?;
        let n2 = normal;
        (Box::new(move |t| normal.cdf(t)), Box::new(move |t| n2.cdf(t)))
    };
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < x.len() {
        let mut j = i;
        while j < x.len() && x[j] == x[i] {
            j += 1;
        }
        // F_n jumps from i/n to j/n at x[i].
        d = d.max((j as f64 / n - g(x[i])).abs()).max((i as f64 / n - g_left(x[i])).abs());
        i = j;
    }
    if sigma2 == 0.0 {
        let below = x.partition_point(|v| *v < 0.0) as f64 / n;
        let upto = x.partition_point(|v| *v <= 0.0) as f64 / n;
        d = d.max(below).max((upto - 1.0).abs());
    }
    Ok(d)
}

/// Kolmogorov–Smirnov test of `samples` against `N(0, sigma2)`; the default
/// threshold is [`default_threshold`].
pub fn gaussian_fit_test(samples: &[f64], sigma2: f64, threshold: Option<f64>) -> Result<KsReport> {
    let ks = ks_statistic(samples, sigma2)?;
    let threshold = threshold.unwrap_or_else(|| default_threshold(samples.len()));
    Ok(KsReport { ks, threshold, pass: ks < threshold, samples: samples.len() })
}

/// Level-`level` quantile of the KS statistic for `reps` Gaussian samples
/// compared with a variance carrying relative standard error `rel_se`,
/// from `sims` simulations.
pub fn calibrated_threshold(reps: usize, rel_se: f64, level: f64, sims: usize, seed: u64) -> Result<f64> {
    if reps == 0 || sims == 0 {
        return Err(Error::param("reps and sims must be positive"));
    }
    if !(level > 0.0 && level < 1.0) || !(rel_se >= 0.0) {
        return Err(Error::param("level must lie in (0, 1) and rel_se must be nonnegative"));
    }
    let mut stats = rng::replicates(sims, seed, |_, sd| {
        let mut g = rng::stream(sd, rng::streams::AUXILIARY);
        let sample: Vec<f64> = (0..reps).map(|_| StandardNormal.sample(&mut g)).collect();
        let z: f64 = StandardNormal.sample(&mut g);
        let sigma2 = (1.0 + rel_se * z).max(1e-6);
        ks_statistic(&sample, sigma2)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    stats.sort_by(f64::total_cmp);
    let idx = ((level * sims as f64).ceil() as usize).clamp(1, sims) - 1;
    Ok(stats[idx])
}
