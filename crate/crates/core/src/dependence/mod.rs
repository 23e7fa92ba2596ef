//! Dependence coefficients and the moment inequalities built on them.

mod conditions;
mod delta;
mod mixing;
mod moments;
mod oracle;

pub use conditions::{
    condition_gamma_check, linear_decay_threshold, theta_series_check, DecayThreshold, GammaCheck, GammaExponent,
    SeriesCheck, ThetaModel,
};
pub use delta::{delta_estimate, delta_linear_bound, dependence_profile, DeltaEstimate, DependenceProfile};
pub use mixing::{mixing_covariance_estimate, MixingParams, MixingReport, ThetaSource};
pub use moments::{
    moment_bound_check, partial_sum_moment, DoublingCheck, MomentEstimate, MomentParams, MomentReport, MomentRow,
    RateFamily,
};
pub use oracle::{exact_mean, exact_moment_oracle, OracleReport, MAX_ORACLE_STATES};

/// `(mean, standard error)` of a sample.
pub(crate) fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
