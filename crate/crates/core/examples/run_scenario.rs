//! Runs a scenario file through the library entry point used by the binary.
//!
//! `cargo run --release --example run_scenario -- scenarios/conditions.toml`

use std::path::PathBuf;

use empclt::scenario::run_scenario;

fn main() -> empclt::Result<()> {
    let config = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "scenarios/conditions.toml".into());
    let out = std::env::temp_dir().join("empclt-example");
    let summary = run_scenario(&config, None, Some(&out))?;
    for c in &summary.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("report written to {}", summary.report.display());
    Ok(())
}
