//! Stationary causal linear processes, coupled copies and delay embeddings.

mod coefficients;
mod innovation;
mod linear;
mod path;

pub use coefficients::{operator_norm, CoefficientModel, DEFAULT_TAIL_TOLERANCE, MAX_DEFAULT_TRUNCATION};
pub use innovation::{generate_innovations, InnovationLaw};
pub use linear::{simulate_coupled, simulate_linear, CoupledPath, LinearProcess, ProcessSpec};
pub use path::{time_delay_embed, SamplePath};
