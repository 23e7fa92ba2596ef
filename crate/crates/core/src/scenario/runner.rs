use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::*;
use crate::clt::{
    approximation_quality, findim_gaussian_check, gaussian_fit_test, limit_covariance_estimate, normalized_sums,
    sigma_f_estimate, sup_statistic,
};
use crate::dependence::{
    condition_gamma_check, dependence_profile, exact_mean, exact_moment_oracle, linear_decay_threshold,
    mixing_covariance_estimate, moment_bound_check, partial_sum_moment, theta_series_check, MixingParams,
    MomentParams,
};
use crate::empirical::{build_chain_grid, build_partition, choose_k, EvalGrid};
use crate::holder::CdfModel;
use crate::observable::{center, reference_seed, Observable};
use crate::processes::{time_delay_embed, LinearProcess, SamplePath};
use crate::{rng, Error, Result};

/// Draws in the reference sample that represents a joint law in `d >= 2`.
pub const JOINT_REFERENCE_DRAWS: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), pass, detail: detail.into() }
    }
}

/// A CSV table written next to the JSON report.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(file: &str, header: &[&str]) -> Self {
        Table { file: file.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn from_path(file: &str, path: &SamplePath) -> Self {
        let mut t = Table::new(file, &[]);
        t.header = (1..=path.dim()).map(|j| format!("x{j}")).collect();
        t.rows = path.rows().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        t
    }
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Results, checks and tables of one task.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Law of `X_0`: closed-form marginals of the process or the configured ones;
/// a reference sample carries the joint law in `d >= 2`.
pub fn scenario_law(scenario: &Scenario, process: &LinearProcess) -> Result<CdfModel> {
    let marginals = match (&scenario.marginals, process.analytic_marginals()) {
        (Some(m), _) => m.clone(),
        (None, Some(m)) => m,
        (None, None) => {
            return Err(Error::Config(
                "this process has no closed-form marginals; set `marginals` in the scenario".into(),
            ))
        }
    };
    if process.d() == 1 {
        return CdfModel::independent(marginals);
    }
    let sample = process.simulate(JOINT_REFERENCE_DRAWS, reference_seed(scenario.seed))?;
    CdfModel::from_reference(sample.as_slice().to_vec(), process.d(), Some(marginals))
}

fn centered(scenario: &Scenario, process: &LinearProcess, f: &Observable) -> Result<(Observable, f64, bool)> {
    f.validate(process.d())?;
    let law = scenario_law(scenario, process).ok();
    center(process, law.as_ref(), f.clone(), scenario.seed)
}

fn sub(seed: u64, k: u64) -> u64 {
    rng::replicate_seed(seed, k)
}

/// Runs the task of `scenario` and collects its results.
pub fn run_task(scenario: &Scenario) -> Result<Outcome> {
    scenario.task.validate()?;
    let process = LinearProcess::new(scenario.process.clone())?;
    let spec = &scenario.process;
    let seed = scenario.seed;
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    let results = match &scenario.task {
        Task::Simulate { n, embed, swap_point } => {
            let (path, shadow) = match swap_point {
                Some(sp) => {
                    let c = process.simulate_coupled(*n, *sp, seed)?;
                    (c.primary, Some(c.shadow))
                }
                None => (process.simulate(*n, seed)?, None),
            };
            let path = match embed {
                Some(k) => time_delay_embed(&path, *k)?,
                None => path,
            };
            let cols: Vec<Value> = (0..path.dim())
                .map(|j| {
                    let c = path.column(j);
                    let mean = c.iter().sum::<f64>() / c.len() as f64;
                    let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / c.len() as f64;
                    json!({ "mean": mean, "variance": var })
                })
                .collect();
            checks.push(Check::new("finite", path.as_slice().iter().all(|v| v.is_finite()), "all path values finite"));
            tables.push(Table::from_path("path.csv", &path));
            if let Some(sh) = &shadow {
                tables.push(Table::from_path("shadow.csv", sh));
            }
            json!({
                "fingerprint": process.fingerprint(),
                "truncation_lag": process.lag(),
                "rows": path.len(),
                "dim": path.dim(),
                "columns": cols,
            })
        }
        Task::Delta { lags, s: order, reps } => {
            let profile = dependence_profile(spec, lags, *order, *reps, seed)?;
            let j = profile.truncation_lag;
            if profile.analytic_bound.is_some() {
                let bad = profile.bound_violations(DEFAULT_SE_MULTIPLIER);
                checks.push(Check::new("under-analytic-bound", bad.is_empty(), format!("lags above bound + 3 SE: {bad:?}")));
            }
            let nonzero: Vec<usize> =
                profile.estimates.iter().filter(|e| e.lag > j && e.estimate != 0.0).map(|e| e.lag).collect();
            checks.push(Check::new("zero-beyond-truncation", nonzero.is_empty(), format!("J = {j}; nonzero lags past J: {nonzero:?}")));
            let mut t = Table::new("delta.csv", &["lag", "estimate", "se", "bound"]);
            for (k, e) in profile.estimates.iter().enumerate() {
                t.push(vec![s(e.lag), s(e.estimate), s(e.se), opt(profile.analytic_bound.as_ref().map(|b| b[k]))]);
            }
            tables.push(t);
            serde_json::to_value(&profile)?
        }
        Task::Mixing { f, gaps, split, r, s: order, alpha, reps, reference_draws, k_max } => {
            let (g, mean, exact) = centered(scenario, &process, f)?;
            let mut reports = Vec::new();
            let mut t = Table::new(
                "mixing.csv",
                &["gaps", "block_gap", "covariance", "se", "ci_lo", "ci_hi", "theta", "bound_unit", "fitted_k"],
            );
            for (k, gap) in gaps.iter().enumerate() {
                let params = MixingParams {
                    gaps: gap.clone(),
                    split: *split,
                    r: *r,
                    s: *order,
                    alpha: *alpha,
                    reps: *reps,
                    reference_draws: *reference_draws,
                };
                let rep = mixing_covariance_estimate(spec, &g, &params, sub(seed, k as u64))?;
                let gap_text = gap.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
                t.push(vec![
                    gap_text,
                    s(rep.block_gap),
                    s(rep.covariance),
                    s(rep.se),
                    s(rep.ci[0]),
                    s(rep.ci[1]),
                    s(rep.theta),
                    s(rep.bound_unit),
                    opt(rep.fitted_k),
                ]);
                reports.push(rep);
            }
            let finite = reports.iter().all(|r| r.covariance.is_finite() && r.se.is_finite());
            checks.push(Check::new("finite", finite, "covariances and standard errors finite"));
            let indep: Vec<&_> = reports.iter().filter(|r| r.bound_unit == 0.0).collect();
            if !indep.is_empty() {
                let ok = indep.iter().all(|r| r.covariance.abs() <= DEFAULT_SE_MULTIPLIER * r.se);
                checks.push(Check::new("independent-blocks", ok, "covariance within 3 SE of 0 where Theta vanishes"));
            }
            if let Some(kmax) = k_max {
                let worst = reports.iter().filter_map(|r| r.fitted_k).fold(0.0, f64::max);
                checks.push(Check::new("fitted-constant", worst <= *kmax, format!("largest fitted K {worst} vs {kmax}")));
            }
            tables.push(t);
            json!({ "centering": { "mean": mean, "exact": exact }, "reports": reports })
        }
        Task::Moment { f, n_list, p, r, family, reps, reference_draws, oracle } => {
            let params = MomentParams {
                n_list: n_list.clone(),
                p: *p,
                r: *r,
                family: family.clone(),
                reps: *reps,
                reference_draws: *reference_draws,
            };
            let report = moment_bound_check(spec, f, &params, seed)?;
            checks.push(Check::new(
                "no-growth",
                !report.growth_detected,
                format!("slope {:?} (se {:?}) of log ratio on log n", report.slope, report.slope_se),
            ));
            let mut t = Table::new("moment.csv", &["n", "moment", "se", "bound_sum", "ratio", "running_c"]);
            for (row, c) in report.rows.iter().zip(&report.running_c) {
                t.push(vec![s(row.n), s(row.moment), s(row.se), s(row.bound_sum), s(row.ratio), s(c)]);
            }
            tables.push(t);
            let oracle_value = match oracle {
                Some(o) => {
                    let g = f.clone().shifted(exact_mean(spec, f)?);
                    let exact = exact_moment_oracle(spec, &g, o.n, o.p)?;
                    let mc = partial_sum_moment(&process, &g, o.n, 2 * o.p as u32, false, o.reps, sub(seed, 1 << 32))?;
                    checks.push(Check::new(
                        "oracle-inequality",
                        exact.holds,
                        format!("E(sum f)^{} = {} vs (2p)! n I_n(2p-1) = {}", 2 * o.p, exact.moment, exact.bound),
                    ));
                    let diff = (mc.mean - exact.moment).abs();
                    checks.push(Check::new(
                        "oracle-monte-carlo",
                        diff <= ORACLE_SE_MULTIPLIER * mc.se,
                        format!("|{} - {}| vs 4 SE = {}", mc.mean, exact.moment, ORACLE_SE_MULTIPLIER * mc.se),
                    ));
                    let mut ti = Table::new("oracle_i_table.csv", &["k", "I_n"]);
                    for (k, v) in exact.i_table.iter().enumerate() {
                        ti.push(vec![s(k), s(v)]);
                    }
                    tables.push(ti);
                    json!({ "exact": exact, "monte_carlo": mc })
                }
                None => Value::Null,
            };
            json!({ "report": report, "oracle": oracle_value })
        }
        Task::Clt { f, n, reps, sigma_reps, lag, threshold, variance_tolerance, findim, min_pass_fraction } => {
            let mut out = serde_json::Map::new();
            if let Some(f) = f {
                let (g, mean, exact) = centered(scenario, &process, f)?;
                let sigma = sigma_f_estimate(spec, &g, *lag, *n, *sigma_reps, sub(seed, 1))?;
                let sums = normalized_sums(spec, &g, *n, *reps, sub(seed, 2))?;
                let ks = gaussian_fit_test(&sums, sigma.sigma2, *threshold)?;
                let sample_variance = sums.iter().map(|v| v * v).sum::<f64>() / sums.len() as f64;
                let ratio = sample_variance / sigma.sigma2;
                checks.push(Check::new("gaussian-fit", ks.pass, format!("KS {} vs threshold {}", ks.ks, ks.threshold)));
                checks.push(Check::new(
                    "variance-agreement",
                    (ratio - 1.0).abs() <= *variance_tolerance,
                    format!("replicate variance / sigma2 = {ratio}"),
                ));
                let mut ts = Table::new("normalized_sums.csv", &["replicate", "value"]);
                for (k, v) in sums.iter().enumerate() {
                    ts.push(vec![s(k), s(v)]);
                }
                tables.push(ts);
                let mut ta = Table::new("autocovariances.csv", &["lag", "gamma"]);
                for (h, v) in sigma.autocovariances.iter().enumerate() {
                    ta.push(vec![s(h), s(v)]);
                }
                tables.push(ta);
                out.insert(
                    "single".into(),
                    json!({
                        "centering": { "mean": mean, "exact": exact },
                        "sigma": sigma,
                        "sample_variance": sample_variance,
                        "variance_ratio": ratio,
                        "ks": ks,
                    }),
                );
            }
            if let Some(params) = findim {
                let law = scenario_law(scenario, &process)?;
                let rep = findim_gaussian_check(spec, Some(&law), params, sub(seed, 3))?;
                checks.push(Check::new(
                    "projections-pass",
                    rep.pass_fraction >= *min_pass_fraction,
                    format!("{} of projections pass, required {min_pass_fraction}", rep.pass_fraction),
                ));
                let mut tp = Table::new(
                    "projections.csv",
                    &["projection", "sigma2", "se", "lag_cutoff", "sample_variance", "ratio", "ks", "threshold", "pass"],
                );
                for (k, p) in rep.projections.iter().enumerate() {
                    tp.push(vec![
                        s(k),
                        s(p.sigma.sigma2),
                        s(p.sigma.se),
                        s(p.sigma.lag_cutoff),
                        s(p.sample_variance),
                        s(p.variance_ratio),
                        s(p.ks.ks),
                        s(p.ks.threshold),
                        s(p.ks.pass),
                    ]);
                }
                tables.push(tp);
                let mut tc = Table::new("cell_covariance.csv", &["cell_a", "cell_b", "covariance", "se"]);
                for a in 0..rep.cells {
                    for b in 0..rep.cells {
                        tc.push(vec![s(a), s(b), s(rep.covariance[a][b]), s(rep.covariance_se[a][b])]);
                    }
                }
                tables.push(tc);
                out.insert("findim".into(), serde_json::to_value(&rep)?);
            }
            Value::Object(out)
        }
        Task::Empclt { n, reps, kernel_levels, sup_points, oracle_n, sup_tolerance, approximation } => {
            let law = scenario_law(scenario, &process)?;
            let kgrid = EvalGrid::quantile(&law.marginals, kernel_levels)?;
            let kernel = limit_covariance_estimate(spec, &law, &kgrid, *n, *reps, sub(seed, 1))?;
            let symmetric = (0..kernel.matrix.len()).all(|i| (0..i).all(|j| kernel.matrix[i][j] == kernel.matrix[j][i]));
            checks.push(Check::new("kernel-symmetric", symmetric, "Gamma(s,t) = Gamma(t,s)"));
            let neg = kernel.negative_diagonal(2.0);
            checks.push(Check::new("kernel-diagonal", neg.is_empty(), format!("diagonal below -2 SE at {neg:?}")));
            let iid = process.lag() == 0;
            let mut tk = Table::new("kernel.csv", &["i", "j", "s", "t", "gamma", "se", "target"]);
            let mut worst: f64 = 0.0;
            for (i, p) in kernel.points.iter().enumerate() {
                for (j, q) in kernel.points.iter().enumerate() {
                    // Independent observations: F(s ^ t) - F(s) F(t).
                    let target = iid.then(|| {
                        let meet: Vec<f64> = p.coords().iter().zip(q.coords()).map(|(a, b)| a.min(*b)).collect();
                        law.cdf(&meet) - law.cdf(p.coords()) * law.cdf(q.coords())
                    });
                    if let Some(tg) = target {
                        let se = kernel.se[i][j];
                        let dev = (kernel.matrix[i][j] - tg).abs();
                        worst = worst.max(if se > 0.0 { dev / se } else if dev > 0.0 { f64::INFINITY } else { 0.0 });
                    }
                    tk.push(vec![s(i), s(j), s(p), s(q), s(kernel.matrix[i][j]), s(kernel.se[i][j]), opt(target)]);
                }
            }
            tables.push(tk);
            if iid {
                checks.push(Check::new(
                    "iid-kernel",
                    worst <= DEFAULT_SE_MULTIPLIER,
                    format!("largest deviation from F(s^t) - F(s)F(t) is {worst} SE"),
                ));
            }
            let per_axis = (*sup_points as f64).powf(1.0 / process.d() as f64).ceil() as usize;
            let levels: Vec<f64> = (1..=per_axis).map(|k| k as f64 / (per_axis + 1) as f64).collect();
            let sgrid = EvalGrid::quantile(&law.marginals, &levels)?;
            let sup = sup_statistic(spec, &law, &sgrid, *n, *reps, sub(seed, 2))?;
            let sup_oracle = match oracle_n {
                Some(big) => Some(sup_statistic(spec, &law, &sgrid, *big, *reps, sub(seed, 3))?),
                None => None,
            };
            let mut ts = Table::new("sup_statistic.csv", &["level", "quantile", "reference_quantile"]);
            for &(level, q) in &sup.quantiles {
                ts.push(vec![s(level), s(q), opt(sup_oracle.as_ref().map(|o| o.quantile(level)))]);
            }
            tables.push(ts);
            if let Some(o) = &sup_oracle {
                let (a, b) = (sup.quantile(0.95), o.quantile(0.95));
                checks.push(Check::new(
                    "sup-quantile",
                    (a - b).abs() <= *sup_tolerance,
                    format!("95% quantile {a} vs large-n reference {b}"),
                ));
            }
            let approx = match approximation {
                Some(a) => {
                    let rep = approximation_quality(spec, &law, &a.m_list, *n, a.reps, a.epsilon, sub(seed, 4))?;
                    checks.push(Check::new(
                        "approximation-trend",
                        rep.trend_ok,
                        format!("inversions at positions {:?}", rep.inversions),
                    ));
                    let mut ta = Table::new("approximation.csv", &["m", "exceed", "frequency", "se", "median_gap", "max_gap"]);
                    for r in &rep.rows {
                        ta.push(vec![s(r.m), s(r.exceed), s(r.frequency), s(r.se), s(r.median_gap), s(r.max_gap)]);
                    }
                    tables.push(ta);
                    Some(rep)
                }
                None => None,
            };
            json!({ "kernel": kernel, "sup": sup, "sup_reference": sup_oracle, "approximation": approx })
        }
        Task::Chain { n, m, epsilon, points, alpha } => {
            let law = scenario_law(scenario, &process)?;
            let part = build_partition(&law.marginals, *m)?;
            let kc = choose_k(*n, part.h(), process.d(), *epsilon)?;
            let grid = build_chain_grid(&part, kc.k)?.with_alpha(*alpha)?;
            let rows = rng::replicates(*points, seed, |_, sd| -> Result<(Vec<f64>, f64, bool, bool)> {
                let path = process.simulate(*n, sd)?;
                let mut g = rng::stream(sd, rng::streams::AUXILIARY);
                let t: Vec<f64> = law
                    .marginals
                    .iter()
                    .map(|mg| mg.generalized_inverse(g.random::<f64>()))
                    .collect::<Result<_>>()?;
                let tel = grid.telescope(&path, &t)?;
                let err = (tel.total() - tel.lhs).abs();
                let mut monotone = true;
                for x in path.rows() {
                    monotone &= grid.chain_inequalities_hold(&t, x)?;
                }
                let mut halving = true;
                for k in 1..=grid.depth() {
                    let (j1, l1) = grid.chain_indices(&t, k)?;
                    let (j0, l0) = grid.chain_indices(&t, k - 1)?;
                    halving &= j1 == j0 && l1.iter().zip(&l0).all(|(a, b)| a.div_euclid(2) == *b);
                }
                Ok((t, err, monotone, halving))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let max_err = rows.iter().map(|r| r.1).fold(0.0, f64::max);
            let tol = CHAIN_TOLERANCE * *n as f64;
            checks.push(Check::new("telescoping", max_err <= tol, format!("largest error {max_err} vs {tol}")));
            checks.push(Check::new("monotone-chain", rows.iter().all(|r| r.2), "chain ordering at every observation"));
            checks.push(Check::new("floor-halving", rows.iter().all(|r| r.3), "l(k-1) = floor(l(k)/2)"));
            let mut t = Table::new("chain.csv", &["point", "t", "identity_error", "monotone", "halving"]);
            for (k, r) in rows.iter().enumerate() {
                let coords = r.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
                t.push(vec![s(k), coords, s(r.1), s(r.2), s(r.3)]);
            }
            tables.push(t);
            json!({ "k": kc, "h": part.h(), "cells": part.cell_count(), "max_identity_error": max_err })
        }
        Task::Conditions { theta, alpha, r, d, p_min, p_max, series, series_p } => {
            let gamma = condition_gamma_check(*theta, *alpha, *r, *d, (*p_min, *p_max))?;
            let decay = linear_decay_threshold(*r, *theta, *d, *p_max)?;
            // Direct scan, written out independently of the library routine.
            let rd = *r * *d as f64;
            let mut best = f64::INFINITY;
            let mut p = rd.floor() as usize + 1;
            while p <= *p_max {
                let pf = p as f64;
                best = best.min(*r / *theta * (2.0 * pf - 1.0) * pf / (pf - rd));
                p += 1;
            }
            checks.push(Check::new("scan-agreement", best == decay.b_star, format!("direct scan {best} vs {}", decay.b_star)));
            let mut tg = Table::new("gamma_scan.csv", &["p", "threshold"]);
            for (p, v) in &gamma.scanned {
                tg.push(vec![s(p), s(v)]);
            }
            tables.push(tg);
            let mut td = Table::new("decay_scan.csv", &["p", "b"]);
            for (p, v) in &decay.values {
                td.push(vec![s(p), s(v)]);
            }
            tables.push(td);
            let series_check = match series {
                Some(model) => {
                    let c = theta_series_check(model, *series_p)?;
                    let mut tsr = Table::new("series.csv", &["terms", "partial_sum"]);
                    for (k, v) in &c.partial_sums {
                        tsr.push(vec![s(k), s(v)]);
                    }
                    tables.push(tsr);
                    Some(c)
                }
                None => None,
            };
            json!({ "gamma": gamma, "decay": decay, "series": series_check })
        }
    };
    Ok(Outcome { results, checks, tables })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(task: &str) -> Scenario {
        Scenario::from_toml(&format!(
            r#"
name = "t"
seed = 3
[process]
d = 1
q = 1
[process.innovation]
kind = "uniform"
[process.coefficients]
kind = "explicit"
matrices = [[[1.0]]]
[task]
{task}
"#
        ))
        .unwrap()
    }

    #[test]
    fn conditions_task() {
        let out = run_task(&scenario("kind = \"conditions\"\ntheta = 1.0\nalpha = 1.0\nr = 1.0\nd = 1")).unwrap();
        assert!(out.passed());
        assert_eq!(out.results["decay"]["b_star"], 6.0);
    }

    #[test]
    fn chain_task() {
        let out = run_task(&scenario("kind = \"chain\"\nn = 50\nm = 4\npoints = 20")).unwrap();
        assert!(out.passed(), "{:?}", out.checks);
    }

    #[test]
    fn simulate_task_tables() {
        let out = run_task(&scenario("kind = \"simulate\"\nn = 20\nembed = 3")).unwrap();
        assert_eq!(out.tables[0].header, vec!["x1", "x2", "x3"]);
        assert_eq!(out.tables[0].rows.len(), 18);
    }
}
