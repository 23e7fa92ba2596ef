//! Monte Carlo checks of the Gaussian limits: long-run variance, normalized
//! sums, Cramér–Wold projections of the smoothed process and the covariance
//! kernel of the empirical process.

mod ks;
mod limits;
mod variance;

pub use ks::{calibrated_threshold, default_threshold, gaussian_fit_test, ks_statistic, KsReport};
pub use limits::{
    approximation_quality, findim_gaussian_check, limit_covariance_estimate, sup_statistic, ApproxReport, ApproxRow,
    CovKernelEstimate, FindimParams, FindimReport, ProjectionReport, SupStatistic,
};
pub use variance::{choose_lag_cutoff, normalized_sums, sigma_f_estimate, SigmaEstimate, MAX_AUTO_LAG};
