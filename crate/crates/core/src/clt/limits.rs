use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ks::{calibrated_threshold, gaussian_fit_test, KsReport};
use super::variance::{autocovariances, sigma_from_replicates, SigmaEstimate, MAX_AUTO_LAG};
use crate::empirical::{build_partition, empirical_process, EvalGrid, SmoothedProcess};
use crate::holder::{CdfModel, ExtendedPoint};
use crate::processes::{LinearProcess, ProcessSpec};
use crate::{rng, Error, Result};

fn resolve_law(process: &LinearProcess, law: Option<&CdfModel>) -> Result<CdfModel> {
    match law {
        Some(l) => Ok(l.clone()),
        None => CdfModel::independent(process.analytic_marginals().ok_or_else(|| {
            Error::param("no closed-form marginal law for this process; supply one explicitly")
        })?),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindimParams {
    pub m: usize,
    pub n: usize,
    pub reps: usize,
    /// Number of random unit directions, ignored when `directions` is set.
    #[serde(default = "default_projections")]
    pub projections: usize,
    #[serde(default)]
    pub directions: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Paths used for the long-run variance of each projection.
    #[serde(default = "default_sigma_reps")]
    pub sigma_reps: usize,
    #[serde(default)]
    pub sigma_lag: Option<usize>,
    /// Quantile of the calibrated KS null used as the pass threshold.
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_sims")]
    pub calibration_sims: usize,
    /// Largest accepted `|sample variance / sigma2 - 1|`.
    #[serde(default = "default_variance_tolerance")]
    pub variance_tolerance: f64,
}

fn default_projections() -> usize {
    20
}
fn default_alpha() -> f64 {
    1.0
}
fn default_sigma_reps() -> usize {
    200
}
fn default_level() -> f64 {
    0.99
}
fn default_sims() -> usize {
    1000
}
fn default_variance_tolerance() -> f64 {
    0.1
}

impl FindimParams {
    pub fn new(m: usize, n: usize, reps: usize) -> Self {
        FindimParams {
            m,
            n,
            reps,
            projections: default_projections(),
            directions: None,
            alpha: default_alpha(),
            sigma_reps: default_sigma_reps(),
            sigma_lag: None,
            level: default_level(),
            calibration_sims: default_sims(),
            variance_tolerance: default_variance_tolerance(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub lambda: Vec<f64>,
    pub sigma: SigmaEstimate,
    /// Mean square of the normalized sums.
    pub sample_variance: f64,
    pub variance_ratio: f64,
    /// `|variance_ratio - 1|` exceeds the tolerance.
    pub mismatch: bool,
    pub ks: KsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FindimReport {
    pub m: usize,
    pub n: usize,
    pub reps: usize,
    pub cells: usize,
    pub expectations: Vec<f64>,
    /// Replicate covariance of the normalized cell sums.
    pub covariance: Vec<Vec<f64>>,
    pub covariance_se: Vec<Vec<f64>>,
    pub projections: Vec<ProjectionReport>,
    pub pass_fraction: f64,
}

fn random_directions(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut g = rng::stream(seed, rng::streams::AUXILIARY);
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut g)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

/// Covariance matrix of replicate vectors and the standard error of every entry.
fn replicate_covariance(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let reps = rows.len() as f64;
    let k = rows.first().map_or(0, Vec::len);
    let means: Vec<f64> = (0..k).map(|a| rows.iter().map(|r| r[a]).sum::<f64>() / reps).collect();
    let mut cov = vec![vec![0.0; k]; k];
    let mut se = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a..k {
            let z: Vec<f64> = rows.iter().map(|r| (r[a] - means[a]) * (r[b] - means[b])).collect();
            let (m, s) = crate::dependence::mean_se(&z);
            let c = m * reps / (reps - 1.0);
            cov[a][b] = c;
            cov[b][a] = c;
            se[a][b] = s;
            se[b][a] = s;
        }
    }
    (cov, se)
}

/// Cramér–Wold check of the smoothed cell vector: for each direction `lambda`,
/// the normalized sums of `lambda . (phi_j(X_i) - E phi_j)` are tested against
/// `N(0, sigma2)` with `sigma2` from an independent long-run variance estimate.
pub fn findim_gaussian_check(spec: &ProcessSpec, law: Option<&CdfModel>, params: &FindimParams, seed: u64) -> Result<FindimReport> {
    let process = LinearProcess::new(spec.clone())?;
    let law = resolve_law(&process, law)?;
    if params.n < 2 || params.reps < 100 || params.sigma_reps < 2 {
        return Err(Error::param("need n >= 2, reps >= 100 and sigma_reps >= 2"));
    }
    let sp = SmoothedProcess::new(build_partition(&law.marginals, params.m)?, &law, params.alpha)?;
    let cells = sp.partition().cell_count();
    let directions = match &params.directions {
        Some(dirs) => dirs
            .iter()
            .map(|v| {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if v.len() != cells || norm == 0.0 {
                    return Err(Error::Shape(format!("directions must be nonzero vectors of length {cells}")));
                }
                Ok(v.iter().map(|x| x / norm).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?,
        None => random_directions(params.projections, cells, seed),
    };
    let active: Vec<usize> = (0..cells).filter(|&c| sp.bump(c).is_some()).collect();
    // Centered cell values along a path, one row per time.
    let cell_series = |path: &crate::SamplePath| -> Vec<Vec<f64>> {
        path.rows()
            .map(|x| {
                let mut v = vec![0.0; cells];
                for &c in &active {
                    v[c] = sp.bump(c).unwrap().eval(x) - sp.expectation(c);
                }
                v
            })
            .collect()
    };

    let rn = (params.n as f64).sqrt();
    let sums = rng::replicates(params.reps, rng::replicate_seed(seed, 0), |_, sd| {
        let path = process.simulate(params.n, sd)?;
        let mut s = vec![0.0; cells];
        for v in cell_series(&path) {
            for (a, b) in s.iter_mut().zip(&v) {
                *a += b;
            }
        }
        Ok(s.into_iter().map(|x| x / rn).collect::<Vec<f64>>())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (covariance, covariance_se) = replicate_covariance(&sums);

    let max_lag = params.sigma_lag.unwrap_or(MAX_AUTO_LAG).min(params.n - 1);
    // Per replicate, per direction autocovariances of the projected series.
    let acov = rng::replicates(params.sigma_reps, rng::replicate_seed(seed, 1), |_, sd| {
        let path = process.simulate(params.n, sd)?;
        let series = cell_series(&path);
        Ok(directions
            .iter()
            .map(|lam| {
                let proj: Vec<f64> = series.iter().map(|v| v.iter().zip(lam).map(|(a, b)| a * b).sum()).collect();
                autocovariances(&proj, max_lag)
            })
            .collect::<Vec<_>>())
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut projections = Vec::with_capacity(directions.len());
    for (k, lam) in directions.iter().enumerate() {
        let per_rep: Vec<Vec<f64>> = acov.iter().map(|r| r[k].clone()).collect();
        let sigma = sigma_from_replicates(&per_rep, params.sigma_lag, params.n);
        let samples: Vec<f64> = sums.iter().map(|s| s.iter().zip(lam).map(|(a, b)| a * b).sum()).collect();
        let sample_variance = samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64;
        let rel_se = if sigma.sigma2 > 0.0 { sigma.se / sigma.sigma2 } else { 0.0 };
        let threshold = calibrated_threshold(
            params.reps,
            rel_se,
            params.level,
            params.calibration_sims,
            rng::replicate_seed(seed, 100 + k as u64),
        )?;
        let ks = gaussian_fit_test(&samples, sigma.sigma2, Some(threshold))?;
        let variance_ratio = sample_variance / sigma.sigma2;
        projections.push(ProjectionReport {
            lambda: lam.clone(),
            mismatch: !((variance_ratio - 1.0).abs() <= params.variance_tolerance),
            sigma,
            sample_variance,
            variance_ratio,
            ks,
        });
    }
    let pass_fraction = if projections.is_empty() {
        1.0
    } else {
        projections.iter().filter(|p| p.ks.pass).count() as f64 / projections.len() as f64
    };
    Ok(FindimReport {
        m: params.m,
        n: params.n,
        reps: params.reps,
        cells,
        expectations: (0..cells).map(|c| sp.expectation(c)).collect(),
        covariance,
        covariance_se,
        projections,
        pass_fraction,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovKernelEstimate {
    pub points: Vec<ExtendedPoint>,
    pub matrix: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    pub n: usize,
    pub reps: usize,
}

impl CovKernelEstimate {
    /// Diagonal entries below `-k` standard errors.
    pub fn negative_diagonal(&self, k: f64) -> Vec<usize> {
        (0..self.matrix.len()).filter(|&i| self.matrix[i][i] < -k * self.se[i][i]).collect()
    }
}

/// Replicate covariance of `U_n` over the grid points.
pub fn limit_covariance_estimate(spec: &ProcessSpec, law: &CdfModel, grid: &EvalGrid, n: usize, reps: usize, seed: u64) -> Result<CovKernelEstimate> {
    if reps < 2 || grid.is_empty() {
        return Err(Error::param("need at least two replicates and a nonempty grid"));
    }
    let process = LinearProcess::new(spec.clone())?;
    let rows = rng::replicates(reps, seed, |_, sd| empirical_process(&process.simulate(n, sd)?, law, grid))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (matrix, se) = replicate_covariance(&rows);
    Ok(CovKernelEstimate { points: grid.points.clone(), matrix, se, n, reps })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupStatistic {
    pub n: usize,
    pub reps: usize,
    pub grid_size: usize,
    /// `(level, quantile)` pairs.
    pub quantiles: Vec<(f64, f64)>,
    /// Sorted replicate values of `max_t |U_n(t)|`.
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl SupStatistic {
    /// Empirical quantile (inverse of the empirical distribution function).
    pub fn quantile(&self, level: f64) -> f64 {
        let k = self.values.len();
        let idx = ((level * k as f64).ceil() as usize).clamp(1, k) - 1;
        self.values[idx]
    }
}

/// Distribution of the grid maximum of `|U_n|` over `reps` replicates.
pub fn sup_statistic(spec: &ProcessSpec, law: &CdfModel, grid: &EvalGrid, n: usize, reps: usize, seed: u64) -> Result<SupStatistic> {
    if reps == 0 || grid.is_empty() {
        return Err(Error::param("need replicates and a nonempty grid"));
    }
    let process = LinearProcess::new(spec.clone())?;
    let mut values = rng::replicates(reps, seed, |_, sd| {
        let u = empirical_process(&process.simulate(n, sd)?, law, grid)?;
        Ok(u.into_iter().map(f64::abs).fold(0.0, f64::max))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    values.sort_by(f64::total_cmp);
    let mut out = SupStatistic { n, reps, grid_size: grid.len(), quantiles: Vec::new(), values };
    out.quantiles = [0.5, 0.9, 0.95, 0.99].iter().map(|&l| (l, out.quantile(l))).collect();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxRow {
    pub m: usize,
    pub exceed: usize,
    pub frequency: f64,
    pub se: f64,
    pub median_gap: f64,
    pub max_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxReport {
    pub epsilon: f64,
    pub n: usize,
    pub reps: usize,
    pub grid_size: usize,
    pub rows: Vec<ApproxRow>,
    /// Positions `k` with `frequency[k+1] > frequency[k]`.
    pub inversions: Vec<usize>,
    /// At most one inversion, within two binomial standard errors.
    pub trend_ok: bool,
}

/// Random grid points added to the partition corners.
pub const APPROX_RANDOM_POINTS: usize = 1000;

/// Frequency of `max_t |U_n(t) - U_n^(m)(t)| > epsilon` for every `m`, with all
/// `m` sharing the paths and a grid containing every partition's corners.
pub fn approximation_quality(
    spec: &ProcessSpec,
    law: &CdfModel,
    m_list: &[usize],
    n: usize,
    reps: usize,
    epsilon: f64,
    seed: u64,
) -> Result<ApproxReport> {
    if m_list.is_empty() || reps == 0 {
        return Err(Error::param("need a nonempty m list and replicates"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    let process = LinearProcess::new(spec.clone())?;
    let smoothed = m_list
        .iter()
        .map(|&m| SmoothedProcess::new(build_partition(&law.marginals, m)?, law, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let parts: Vec<_> = smoothed.iter().map(|s| s.partition()).collect();
    let grid = EvalGrid::boundary_augmented(&parts, APPROX_RANDOM_POINTS, rng::replicate_seed(seed, u64::MAX))?;
    let gaps = rng::replicates(reps, seed, |_, sd| {
        let path = process.simulate(n, sd)?;
        smoothed.iter().map(|s| s.approximation_gap(&path, law, &grid)).collect::<Result<Vec<f64>>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let rf = reps as f64;
    let rows: Vec<ApproxRow> = m_list
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let mut g: Vec<f64> = gaps.iter().map(|r| r[k]).collect();
            g.sort_by(f64::total_cmp);
            let exceed = g.iter().filter(|v| **v > epsilon).count();
            let frequency = exceed as f64 / rf;
            ApproxRow {
                m,
                exceed,
                frequency,
                se: (frequency * (1.0 - frequency) / rf).sqrt(),
                median_gap: g[(reps - 1) / 2],
                max_gap: g[reps - 1],
            }
        })
        .collect();
    let inversions: Vec<usize> = (0..rows.len().saturating_sub(1))
        .filter(|&k| rows[k + 1].frequency > rows[k].frequency)
        .collect();
    let trend_ok = inversions.len() <= 1
        && inversions.iter().all(|&k| {
            let pooled = (rows[k].frequency + rows[k + 1].frequency) / 2.0;
            let se = (pooled * (1.0 - pooled) * 2.0 / rf).sqrt();
            rows[k + 1].frequency - rows[k].frequency <= 2.0 * se
        });
    Ok(ApproxReport { epsilon, n, reps, grid_size: grid.len(), rows, inversions, trend_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{CoefficientModel, InnovationLaw};

    fn uniform_iid() -> (ProcessSpec, CdfModel) {
        let spec = ProcessSpec::iid(InnovationLaw::Uniform);
        let law = CdfModel::independent(LinearProcess::new(spec.clone()).unwrap().analytic_marginals().unwrap()).unwrap();
        (spec, law)
    }

    #[test]
    fn iid_kernel_is_brownian_bridge() {
        let (spec, law) = uniform_iid();
        let levels = [0.2, 0.5, 0.8];
        let grid = EvalGrid::quantile(&law.marginals, &levels).unwrap();
        let k = limit_covariance_estimate(&spec, &law, &grid, 500, 1500, 3).unwrap();
        for (a, s) in levels.iter().enumerate() {
            for (b, t) in levels.iter().enumerate() {
                let want = s.min(*t) - s * t;
                assert!((k.matrix[a][b] - want).abs() < 3.5 * k.se[a][b], "{a} {b}: {} vs {want}", k.matrix[a][b]);
                assert_eq!(k.matrix[a][b], k.matrix[b][a]);
            }
        }
        assert!(k.negative_diagonal(2.0).is_empty());
    }

    #[test]
    fn kernel_vanishes_at_infinite_corners() {
        let (spec, law) = uniform_iid();
        let grid = EvalGrid {
            points: vec![ExtendedPoint::splat(f64::INFINITY, 1), ExtendedPoint::splat(f64::NEG_INFINITY, 1)],
            kind: crate::empirical::GridKind::Quantile,
        };
        let k = limit_covariance_estimate(&spec, &law, &grid, 100, 50, 3).unwrap();
        assert_eq!(k.matrix, vec![vec![0.0; 2]; 2]);
    }

    #[test]
    fn iid_findim_covariance_matches_cell_variances() {
        let (spec, law) = uniform_iid();
        let mut params = FindimParams::new(4, 200, 2000);
        params.projections = 3;
        params.calibration_sims = 200;
        let rep = findim_gaussian_check(&spec, Some(&law), &params, 8).unwrap();
        // Var phi_j by midpoint quadrature of E phi^2 on the uniform law.
        let h = 3f64.sqrt();
        let sp = SmoothedProcess::new(build_partition(&law.marginals, 4).unwrap(), &law, 1.0).unwrap();
        for c in 0..rep.cells {
            let Some(b) = sp.bump(c) else { continue };
            let steps = 200_000;
            let e2 = (0..steps)
                .map(|i| -h + (i as f64 + 0.5) * 2.0 * h / steps as f64)
                .map(|x| b.eval(&[x]).powi(2))
                .sum::<f64>()
                / steps as f64;
            let var = e2 - sp.expectation(c).powi(2);
            assert!((rep.covariance[c][c] - var).abs() < 3.0 * rep.covariance_se[c][c], "cell {c}");
        }
        assert_eq!(rep.covariance[0][0], 0.0);
        assert!(rep.projections.iter().all(|p| p.ks.ks >= 0.0 && p.ks.ks <= 1.0));
    }

    #[test]
    fn dependent_projection_passes() {
        let spec = ProcessSpec::scalar(InnovationLaw::Rademacher, CoefficientModel::geometric(0.5, 1.0, None));
        let mut params = FindimParams::new(5, 1000, 400);
        params.projections = 2;
        params.sigma_reps = 100;
        params.calibration_sims = 200;
        params.variance_tolerance = 0.2;
        let rep = findim_gaussian_check(&spec, None, &params, 2).unwrap();
        assert!(rep.projections.iter().all(|p| p.ks.pass && !p.mismatch), "{:?}", rep.projections);
    }

    #[test]
    fn approximation_bounds() {
        let (spec, law) = uniform_iid();
        let n = 400;
        let huge = approximation_quality(&spec, &law, &[4], n, 20, 2.0 * (n as f64).sqrt(), 1).unwrap();
        assert_eq!(huge.rows[0].frequency, 0.0);
        let rep = approximation_quality(&spec, &law, &[5, 20], n, 40, 0.25, 1).unwrap();
        assert!(rep.rows.iter().all(|r| (0.0..=1.0).contains(&r.frequency)));
        assert!(rep.rows[0].median_gap > rep.rows[1].median_gap);
    }

    #[test]
    fn fine_partition_rarely_exceeds() {
        let (spec, law) = uniform_iid();
        let rep = approximation_quality(&spec, &law, &[2000], 2000, 20, 0.5, 4).unwrap();
        assert!(rep.rows[0].frequency <= 0.1, "{:?}", rep.rows);
    }
}
