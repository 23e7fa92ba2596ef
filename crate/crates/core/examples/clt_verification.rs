//! Long-run variance, normalized sums and a KS fit for one bump under a
//! dependent process, then the Cramér–Wold check of the cell vector.

use empclt::clt::{findim_gaussian_check, gaussian_fit_test, normalized_sums, sigma_f_estimate, FindimParams};
use empclt::holder::HolderBump;
use empclt::processes::{CoefficientModel, InnovationLaw, ProcessSpec};
use empclt::Observable;

fn main() -> empclt::Result<()> {
    let spec = ProcessSpec::scalar(InnovationLaw::Rademacher, CoefficientModel::geometric(0.5, 1.0, None));
    // Symmetric bump under a symmetric law: mean 1/2.
    let f = Observable::bump(HolderBump::from_corners(&[-0.5], &[0.5], 1.0)?).shifted(0.5);

    let sigma = sigma_f_estimate(&spec, &f, None, 5000, 200, 1)?;
    println!("sigma_f^2 = {:.5} ± {:.5} (cutoff L = {})", sigma.sigma2, sigma.se, sigma.lag_cutoff);
    let sums = normalized_sums(&spec, &f, 5000, 1000, 2)?;
    let var = sums.iter().map(|v| v * v).sum::<f64>() / sums.len() as f64;
    println!("replicate variance of S_n / sqrt(n) = {var:.5}");
    let ks = gaussian_fit_test(&sums, sigma.sigma2, None)?;
    println!("KS {:.4} vs {:.4}: pass {}", ks.ks, ks.threshold, ks.pass);

    let mut params = FindimParams::new(5, 5000, 1000);
    params.projections = 10;
    let rep = findim_gaussian_check(&spec, None, &params, 3)?;
    for (k, p) in rep.projections.iter().enumerate() {
        println!(
            "projection {k:>2}: sigma2 {:.5}  variance ratio {:.3}  KS {:.4} < {:.4}: {}",
            p.sigma.sigma2, p.variance_ratio, p.ks.ks, p.ks.threshold, p.ks.pass
        );
    }
    println!("pass fraction {:.2}", rep.pass_fraction);
    Ok(())
}
