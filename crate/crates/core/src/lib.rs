//! Simulation and verification toolkit for the empirical-process central
//! limit theorem of stationary, weakly dependent `R^d`-valued data.
//!
//! The crate is organised by capability:
//!
//! - [`processes`]: causal linear processes driven by i.i.d. innovations,
//!   coupled copies and time-delay embeddings.
//! - [`holder`]: Hölder bumps approximating indicator functions of lower-left
//!   orthants, moduli of continuity, generalized inverses and the control
//!   function `Psi`.
//! - [`empirical`]: empirical CDFs, the empirical process `U_n`, quantile
//!   partitions, the smoothed process `U_n^(m)` and the dyadic chaining
//!   machinery.
//! - [`dependence`]: physical dependence coefficients, multiple-mixing
//!   covariances, `2p`-th moment bounds, the exact enumeration oracle and
//!   the rate-condition arithmetic.
//! - [`clt`]: long-run variances, normalized sums, Kolmogorov-Smirnov
//!   checks and limit-kernel estimates.
//! - [`scenario`]: TOML-driven experiment runner behind the `empclt` binary.
//!
//! Every Monte Carlo routine takes an explicit `u64` seed. Replicate streams
//! are derived from `(master seed, replicate index)` (see [`rng`]), so results
//! do not depend on the number of worker threads.

pub mod clt;
pub mod dependence;
pub mod empirical;
mod error;
pub mod holder;
pub mod observable;
pub mod processes;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use holder::{ExtendedPoint, HolderBump, MarginalCdf};
pub use observable::Observable;
pub use processes::{CoefficientModel, InnovationLaw, LinearProcess, ProcessSpec, SamplePath};
