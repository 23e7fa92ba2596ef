use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use super::config::*;
use super::runner::{run_task, Check, Outcome, Table};
use crate::rng::SEED_SCHEME;
use crate::Result;

/// Name of the JSON summary inside the output directory.
pub const REPORT_FILE: &str = "report.json";

/// JSON summary of one scenario run. `generated_at` is the only field that
/// changes between identical runs.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub task: String,
    pub fingerprint: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub generated_at: u64,
    pub config: Scenario,
    pub results: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub tables: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub passed: bool,
    pub output_dir: PathBuf,
    pub report: PathBuf,
    pub checks: Vec<Check>,
}

fn write_table(dir: &Path, table: &Table) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(dir.join(&table.file))?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.json` and every table of `outcome` into `dir`.
pub fn write_outputs(scenario: &Scenario, outcome: &Outcome, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    for t in &outcome.tables {
        write_table(dir, t)?;
    }
    let generated_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut config = scenario.resolved();
    config.output_dir = Some(dir.to_path_buf());
    let report = Report {
        name: scenario.name.clone(),
        task: scenario.task.kind().into(),
        fingerprint: scenario.process.fingerprint(),
        seed: scenario.seed,
        generated_at,
        config,
        results: outcome.results.clone(),
        checks: outcome.checks.clone(),
        passed: outcome.passed(),
        tables: outcome.tables.iter().map(|t| t.file.clone()).collect(),
    };
    let path = dir.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

/// Loads, runs and writes one scenario. `seed` and `out` override the file.
pub fn run_scenario(config: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<RunSummary> {
    let mut scenario = Scenario::load(config)?;
    if let Some(s) = seed {
        scenario.seed = s;
    }
    if let Some(o) = out {
        scenario.output_dir = Some(o.to_path_buf());
    }
    let outcome = run_task(&scenario)?;
    let dir = scenario.output_dir();
    let report = write_outputs(&scenario, &outcome, &dir)?;
    Ok(RunSummary { passed: outcome.passed(), output_dir: dir, report, checks: outcome.checks })
}

/// Version, task kinds, default tolerances and the seed scheme.
pub fn manifest() -> String {
    let mut out = String::new();
    out.push_str(&format!("empclt {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("tasks: {}\n", TASK_KINDS.join(", ")));
    out.push_str("defaults:\n");
    for (key, value) in [
        ("epsilon", DEFAULT_EPSILON.to_string()),
        ("se_multiplier", DEFAULT_SE_MULTIPLIER.to_string()),
        ("oracle_se_multiplier", ORACLE_SE_MULTIPLIER.to_string()),
        ("variance_tolerance", DEFAULT_VARIANCE_TOLERANCE.to_string()),
        ("sup_tolerance", DEFAULT_SUP_TOLERANCE.to_string()),
        ("min_pass_fraction", DEFAULT_MIN_PASS.to_string()),
        ("chain_tolerance_per_n", CHAIN_TOLERANCE.to_string()),
        ("centering_tolerance", crate::observable::CENTERING_TOLERANCE.to_string()),
        ("reference_draws", crate::observable::REFERENCE_DRAWS.to_string()),
        ("ks_threshold", "1.5 * 1.36 / sqrt(reps)".to_string()),
        ("oracle_states", crate::dependence::MAX_ORACLE_STATES.to_string()),
    ] {
        out.push_str(&format!("  {key} = {value}\n"));
    }
    out.push_str(&format!("seed_scheme: {SEED_SCHEME}\n"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_contents() {
        let m = manifest();
        for kind in TASK_KINDS {
            assert!(m.contains(kind));
        }
        assert!(m.contains("epsilon = 0.25"));
        assert_eq!(m, manifest());
    }
}
