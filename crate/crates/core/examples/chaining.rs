//! Dyadic chaining of an indicator through refined quantile partitions.

use empclt::empirical::{build_chain_grid, build_partition, choose_k, SmoothedProcess};
use empclt::holder::CdfModel;
use empclt::processes::{CoefficientModel, InnovationLaw, LinearProcess, ProcessSpec};

fn main() -> empclt::Result<()> {
    let spec = ProcessSpec::scalar(InnovationLaw::StandardNormal, CoefficientModel::geometric(0.6, 1.0, None));
    let process = LinearProcess::new(spec)?;
    let marginals = process.analytic_marginals().expect("gaussian marginals");
    let n = 500;
    let path = process.simulate(n, 3)?;

    let partition = build_partition(&marginals, 8)?;
    let k = choose_k(n, partition.h(), 1, 0.25)?;
    println!("m = 8, h = {}, depth K = {}", partition.h(), k.k);
    let grid = build_chain_grid(&partition, k.k)?;

    let t = [0.37];
    let tel = grid.telescope(&path, &t)?;
    println!("F_n(t) - F_n^(m)(t) = {:.6}", tel.lhs);
    for (level, term) in tel.terms.iter().enumerate() {
        println!("  level {:>2}: {term:+.6}", level + 1);
    }
    println!("  remainder: {:+.6}", tel.remainder);
    println!("sum of terms = {:.6}", tel.total());

    let ok = path.rows().map(|x| grid.chain_inequalities_hold(&t, x)).collect::<empclt::Result<Vec<_>>>()?;
    println!("chain ordering holds at all {} observations: {}", ok.len(), ok.iter().all(|v| *v));

    let law = CdfModel::independent(marginals)?;
    let smoothed = SmoothedProcess::new(partition, &law, 1.0)?;
    println!("U_n^(m)(t) = {:.4}", smoothed.value(&path, &t)?);
    Ok(())
}
