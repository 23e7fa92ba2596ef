//! TOML scenarios: one process, one task, one master seed, written out as a
//! JSON summary plus CSV tables.

mod config;
mod report;
mod runner;

pub use config::*;
pub use report::{manifest, run_scenario, write_outputs, Report, RunSummary, REPORT_FILE};
pub use runner::{run_task, scenario_law, Check, Outcome, Table, JOINT_REFERENCE_DRAWS};
