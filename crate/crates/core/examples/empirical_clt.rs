//! Empirical process of i.i.d. uniform data: covariance kernel against the
//! Brownian bridge, sup statistic, and the smoothing approximation.

use empclt::clt::{approximation_quality, limit_covariance_estimate, sup_statistic};
use empclt::empirical::EvalGrid;
use empclt::holder::CdfModel;
use empclt::processes::{InnovationLaw, LinearProcess, ProcessSpec};

fn main() -> empclt::Result<()> {
    let spec = ProcessSpec::iid(InnovationLaw::Uniform);
    let law = CdfModel::independent(LinearProcess::new(spec.clone())?.analytic_marginals().expect("uniform"))?;
    let levels = [0.1, 0.5, 0.9];
    let grid = EvalGrid::quantile(&law.marginals, &levels)?;
    let kernel = limit_covariance_estimate(&spec, &law, &grid, 2000, 2000, 1)?;
    for (i, s) in levels.iter().enumerate() {
        for (j, t) in levels.iter().enumerate() {
            println!(
                "Gamma({s}, {t}) = {:.4} ± {:.4}   bridge {:.4}",
                kernel.matrix[i][j],
                kernel.se[i][j],
                s.min(*t) - s * t
            );
        }
    }

    let fine: Vec<f64> = (1..=999).map(|k| k as f64 / 1000.0).collect();
    let sup = sup_statistic(&spec, &law, &EvalGrid::quantile(&law.marginals, &fine)?, 2000, 2000, 2)?;
    for (level, q) in &sup.quantiles {
        println!("sup |U_n| quantile {level}: {q:.4}");
    }

    let approx = approximation_quality(&spec, &law, &[5, 10, 20, 40], 2000, 200, 0.25, 3)?;
    for row in &approx.rows {
        println!("m = {:>2}: P(gap > 0.25) = {:.3}  median gap {:.3}", row.m, row.frequency, row.median_gap);
    }
    Ok(())
}
