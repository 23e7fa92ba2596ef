use empclt::empirical::empirical_cdf;
use empclt::processes::{simulate_linear, time_delay_embed, CoefficientModel, InnovationLaw, ProcessSpec, SamplePath};
use empclt::scenario::Scenario;
use empclt::Error;

fn column(path: &SamplePath, j: usize) -> SamplePath {
    SamplePath::from_rows(&path.column(j).into_iter().map(|v| vec![v]).collect::<Vec<_>>()).unwrap()
}

#[test]
fn embedded_marginals_match_scalar_cdf() {
    let spec = ProcessSpec::scalar(InnovationLaw::StandardNormal, CoefficientModel::geometric(0.6, 1.0, None));
    let path = simulate_linear(&spec, 5000, 9).unwrap();
    let embedded = time_delay_embed(&path, 4).unwrap();
    let n = embedded.len() as f64;
    for j in 0..4 {
        let col = column(&embedded, j);
        for t in [-2.0, -1.0, -0.3, 0.0, 0.4, 1.1, 2.5] {
            let gap = (empirical_cdf(&col, &[t]) - empirical_cdf(&path, &[t])).abs();
            assert!(gap <= 2.0 / n.sqrt(), "column {j}, t = {t}: {gap}");
        }
    }
}

#[test]
fn every_shipped_scenario_parses_and_validates() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut kinds = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let s = Scenario::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            s.task.validate().unwrap();
            kinds.push(s.task.kind());
        }
    }
    kinds.sort();
    kinds.dedup();
    assert_eq!(kinds.len(), 8);
}

#[test]
fn invalid_task_is_a_config_error() {
    let text = r#"
name = "bad"
seed = 1
[process]
d = 1
q = 1
[process.innovation]
kind = "uniform"
[process.coefficients]
kind = "explicit"
matrices = [[[1.0]]]
[task]
kind = "delta"
lags = []
reps = 10
"#;
    let err = Scenario::from_toml(text).and_then(|s| s.task.validate());
    assert!(matches!(err, Err(Error::Config(_))));
}
