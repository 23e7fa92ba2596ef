//! Physical dependence coefficients against the linear-filter bound, and a
//! multiple-mixing covariance with its fitted constant.

use empclt::dependence::{dependence_profile, mixing_covariance_estimate, MixingParams};
use empclt::holder::HolderBump;
use empclt::observable::REFERENCE_DRAWS;
use empclt::processes::{CoefficientModel, InnovationLaw, ProcessSpec};
use empclt::Observable;

fn main() -> empclt::Result<()> {
    let spec = ProcessSpec::scalar(InnovationLaw::Rademacher, CoefficientModel::geometric(0.5, 1.0, Some(8)));
    let lags: Vec<usize> = (1..=10).collect();
    let profile = dependence_profile(&spec, &lags, 2.0, 10_000, 7)?;
    let bound = profile.analytic_bound.clone().unwrap_or_default();
    println!("lag  delta_hat     se          bound");
    for (e, b) in profile.estimates.iter().zip(&bound) {
        println!("{:>3}  {:<12.6}{:<12.6}{:.6}", e.lag, e.estimate, e.se, b);
    }

    let gaussian = ProcessSpec::scalar(InnovationLaw::StandardNormal, CoefficientModel::geometric(0.5, 1.0, None));
    let f = Observable::bump(HolderBump::from_corners(&[-1.0], &[0.3], 1.0)?);
    let law = empclt::holder::CdfModel::independent(
        empclt::LinearProcess::new(gaussian.clone())?.analytic_marginals().expect("gaussian"),
    )?;
    let f = f.clone().shifted(f.exact_mean(&law).expect("closed form"));
    for gap in [1, 2, 4] {
        let params = MixingParams {
            gaps: vec![gap],
            split: 1,
            r: 2.0,
            s: 2.0,
            alpha: 1.0,
            reps: 20_000,
            reference_draws: REFERENCE_DRAWS,
        };
        let rep = mixing_covariance_estimate(&gaussian, &f, &params, 11)?;
        println!(
            "gap {gap}: cov {:.5} ± {:.5}  Theta {:.4}  fitted K {:.4}",
            rep.covariance,
            rep.se,
            rep.theta,
            rep.fitted_k.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
