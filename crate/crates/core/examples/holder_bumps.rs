//! Hölder bumps between two corners, their norm bounds and the control function.

use empclt::holder::{estimate_holder_norm, ControlFunction, HolderBump, MarginalCdf};

fn main() -> empclt::Result<()> {
    let a = [0.2, 0.3];
    let b = [0.4, 0.6];
    let bump = HolderBump::from_corners(&a, &b, 1.0)?;
    for x in [[0.1, 0.2], [0.3, 0.4], [0.35, 0.5], [0.5, 0.5]] {
        println!("phi({x:?}) = {:.4}", bump.eval(&x));
    }
    println!("analytic seminorm bound {:.4}", bump.seminorm_bound());

    let est = estimate_holder_norm(|x| bump.eval(x), &[0.0, 0.0], &[1.0, 1.0], 1.0, 1)?;
    println!("lattice estimate: sup {:.4}  seminorm {:.4}  ({} pairs)", est.sup, est.seminorm, est.pairs);

    let control = ControlFunction::new(1.0, vec![MarginalCdf::uniform01(); 2])?;
    println!("control bound Psi(1 / min w(b - a)) = {:.4}", control.bump_bound(&a, &b)?);
    Ok(())
}
