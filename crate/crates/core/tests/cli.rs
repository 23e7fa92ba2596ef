use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_empclt"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

const IID_EMPCLT: &str = r#"
name = "small-iid"
seed = 4

[process]
d = 1
q = 1
[process.innovation]
kind = "uniform"
[process.coefficients]
kind = "explicit"
matrices = [[[1.0]]]

[task]
kind = "empclt"
n = 200
reps = 200
kernel_levels = [0.25, 0.5, 0.75]
sup_points = 200
oracle_n = 400
sup_tolerance = 0.0
"#;

const OVER_BUDGET: &str = r#"
name = "over-budget"
seed = 1

[process]
d = 1
q = 1
[process.innovation]
kind = "rademacher"
[process.coefficients]
kind = "geometric"
rho = 0.5
scale = [[1.0]]
J = 20

[task]
kind = "moment"
n_list = [16, 32]
p = 1
r = 2.0
reps = 200

[task.family]
kind = "power"

[task.oracle]
n = 8
p = 1

[task.f]
kind = "bump"
[task.f.bump]
lower = ["-0.3"]
upper = ["0.6"]
alpha = 1.0
"#;

#[test]
fn misspelled_key_is_named_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("conditions.toml")).unwrap().replace("[process", "[procss");
    let file = dir.path().join("bad.toml");
    fs::write(&file, text).unwrap();
    let out = run(&["--out", dir.path().join("o").to_str().unwrap(), "run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("procss"));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn missing_file_exits_one() {
    let out = run(&["run", "/nonexistent/scenario.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn manifest_lists_tasks_and_seed_scheme() {
    let out = run(&["manifest"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("empclt "));
    for kind in ["simulate", "delta", "mixing", "moment", "clt", "empclt", "chain", "conditions"] {
        assert!(text.contains(kind), "{kind}");
    }
    assert!(text.contains("epsilon = 0.25"));
    assert!(text.contains("seed_scheme"));
}

#[test]
fn passing_run_writes_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--out", dir.path().to_str().unwrap(), "run", scenario("conditions.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS scan-agreement"));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["task"], "conditions");
    assert!(dir.path().join("decay_scan.csv").exists());
}

#[test]
fn failed_check_exits_two_after_running_all_checks() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("iid.toml");
    fs::write(&file, IID_EMPCLT).unwrap();
    let out = run(&["--out", dir.path().join("o").to_str().unwrap(), "run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL sup-quantile"));
    assert!(text.contains("kernel-symmetric"));
    assert!(dir.path().join("o/report.json").exists());
}

#[test]
fn oracle_over_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("big.toml");
    fs::write(&file, OVER_BUDGET).unwrap();
    let out = run(&["--out", dir.path().join("o").to_str().unwrap(), "run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn output_is_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    let cfg = scenario("delta_geometric.toml");
    let mut snaps = Vec::new();
    for jobs in ["1", "3"] {
        let _ = fs::remove_dir_all(&out_dir);
        let out = run(&["--jobs", jobs, "--seed", "11", "--out", out_dir.to_str().unwrap(), "run", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let mut report: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("report.json")).unwrap()).unwrap();
        assert_eq!(report["seed"], 11);
        report.as_object_mut().unwrap().remove("generated_at");
        snaps.push((report, fs::read(out_dir.join("delta.csv")).unwrap()));
    }
    assert_eq!(snaps[0], snaps[1]);
}

#[test]
fn seed_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario("simulate_geometric.toml");
    let mut paths = Vec::new();
    for seed in ["1", "2"] {
        let o = dir.path().join(seed);
        assert!(run(&["--seed", seed, "--out", o.to_str().unwrap(), "run", cfg.to_str().unwrap()]).status.success());
        paths.push(fs::read(o.join("path.csv")).unwrap());
    }
    assert_ne!(paths[0], paths[1]);
}
