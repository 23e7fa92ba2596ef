//! Rate conditions: the gamma threshold, the decay threshold for linear
//! filters and convergence of the weighted Theta series.

use empclt::dependence::{condition_gamma_check, linear_decay_threshold, theta_series_check, ThetaModel};

fn main() -> empclt::Result<()> {
    for (theta, alpha) in [(1.0, 1.0), (1.0, 0.4), (0.5, 0.2)] {
        let c = condition_gamma_check(theta, alpha, 1.0, 1, (1, 20))?;
        println!(
            "theta/alpha = {:.2}: best p {:?}, threshold {:.4}, feasible {}",
            c.ratio,
            c.best_p,
            c.threshold.unwrap_or(f64::NAN),
            c.feasible
        );
    }
    for d in [1, 2, 3] {
        let t = linear_decay_threshold(1.0, 1.0, d, 20)?;
        println!("d = {d}: b* = {:.4} at p = {}", t.b_star, t.argmin_p);
    }
    for a in [3.0, 3.5, 4.0] {
        let s = theta_series_check(&ThetaModel::Power { a }, 2)?;
        println!("Theta(i) = (1+i)^-{a}, p = 2: converges {}", s.converges);
    }
    Ok(())
}
