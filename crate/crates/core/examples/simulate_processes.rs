//! Simulates a geometric linear process, its coupled copy and a delay embedding.

use empclt::processes::{time_delay_embed, CoefficientModel, InnovationLaw, LinearProcess, ProcessSpec};

fn main() -> empclt::Result<()> {
    let spec = ProcessSpec::scalar(InnovationLaw::Rademacher, CoefficientModel::geometric(0.5, 1.0, None));
    let process = LinearProcess::new(spec)?;
    println!("fingerprint {}  truncation lag J = {}", process.fingerprint(), process.lag());

    let path = process.simulate(10_000, 42)?;
    let x = path.column(0);
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
    println!("mean {mean:.4}  variance {var:.4}  (stationary variance 4/3)");

    // Innovations up to time 5 replaced; later values converge back.
    let coupled = process.simulate_coupled(20, 5, 42)?;
    for i in [4, 5, 6, 10, 19] {
        let gap = (coupled.primary.row(i)[0] - coupled.shadow.row(i)[0]).abs();
        println!("|X_{} - X'_{}| = {gap:.6}", i + 1, i + 1);
    }

    let embedded = time_delay_embed(&path, 3)?;
    println!("delay embedding: {} rows in R^{}", embedded.len(), embedded.dim());
    println!("first row {:?}", embedded.row(0));
    Ok(())
}
