//! Exact moments of partial sums by enumerating Rademacher innovations,
//! compared with simulation and with the combinatorial bound.

use empclt::dependence::{exact_mean, exact_moment_oracle, partial_sum_moment};
use empclt::holder::HolderBump;
use empclt::processes::{CoefficientModel, InnovationLaw, LinearProcess, ProcessSpec};
use empclt::Observable;

fn main() -> empclt::Result<()> {
    let spec = ProcessSpec::scalar(InnovationLaw::Rademacher, CoefficientModel::geometric(0.5, 1.0, Some(3)));
    let raw = Observable::bump(HolderBump::from_corners(&[-0.3], &[0.6], 1.0)?);
    let f = raw.clone().shifted(exact_mean(&spec, &raw)?);
    let process = LinearProcess::new(spec.clone())?;
    for p in [1, 2] {
        let rep = exact_moment_oracle(&spec, &f, 6, p)?;
        let mc = partial_sum_moment(&process, &f, 6, 2 * p as u32, false, 100_000, 5)?;
        println!(
            "p = {p}: exact {:.6}  simulated {:.6} ± {:.6}  bound (2p)! n I_n(2p-1) = {:.4}  holds {}",
            rep.moment, mc.mean, mc.se, rep.bound, rep.holds
        );
        println!("  I_n table: {:?}", rep.i_table);
    }
    Ok(())
}
