//! Hölder bumps approximating orthant indicators, marginal distribution
//! functions with their moduli of continuity and generalized inverses, and
//! the control function `Psi`.

mod bump;
mod cdf;
mod control;
mod point;

pub use bump::{ramp, HolderBump};
pub use cdf::{CdfModel, JointLaw, MarginalCdf};
pub use control::{estimate_holder_norm, theta_holder_constant, ControlFunction, HolderEstimate, ThetaEstimate};
pub use point::ExtendedPoint;
