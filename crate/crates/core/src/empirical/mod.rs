//! Empirical CDFs and the empirical process `U_n`, the quantile partition
//! with its smoothed process `U_n^(m)`, and the dyadic chaining machinery
//! linking cell corners to arbitrary points.

mod chain;
mod grid;
mod partition;
mod process;

pub use chain::{build_chain_grid, choose_k, ChainGrid, KChoice, Psi, Telescope};
pub use grid::{sup_distance, EvalGrid, GridKind};
pub use partition::{build_partition, smoothed_empirical_process, PartitionGrid, SmoothedProcess};
pub use process::{empirical_cdf, empirical_process, EmpiricalCdf};
