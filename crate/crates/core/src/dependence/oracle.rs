use serde::Serialize;

use crate::observable::Observable;
use crate::processes::{LinearProcess, ProcessSpec};
use crate::{Error, Result};

/// Largest number of innovation assignments the enumerator visits.
pub const MAX_ORACLE_STATES: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub p: usize,
    pub states: u64,
    /// Exact `E f(X_0)`.
    pub mean: f64,
    /// Exact `E (sum_{i=1}^n f(X_i))^{2p}`.
    pub moment: f64,
    /// `I_n(k)` for `k = 0..=2p-1`.
    pub i_table: Vec<f64>,
    /// `(2p)! n I_n(2p-1)`.
    pub bound: f64,
    pub holds: bool,
}

/// Walks every assignment of the innovations feeding `X_1..X_n`, calling
/// `visit(weight, path)` with the row-major path.
fn enumerate(spec: &ProcessSpec, n: usize, mut visit: impl FnMut(f64, &[f64])) -> Result<u64> {
    let support = spec
        .innovation
        .support()
        .ok_or_else(|| Error::param(format!("{:?} does not have finite support", spec.innovation)))?;
    let mut exact = spec.clone();
    exact.burn_in = None;
    let process = LinearProcess::new(exact)?;
    let len = process.innovation_len(n);
    let k = support.len() as u64;
    let states = (0..len).try_fold(1u64, |acc, _| acc.checked_mul(k).filter(|s| *s <= MAX_ORACLE_STATES));
    let states = states.ok_or_else(|| {
        Error::Resource(format!(
            "{}^{len} innovation assignments exceed the budget of {MAX_ORACLE_STATES}",
            support.len()
        ))
    })?;
    let weight = 1.0 / states as f64;
    let mut digits = vec![0usize; len];
    let mut innov: Vec<f64> = vec![support[0]; len];
    let mut out = vec![0.0; n * process.d()];
    for _ in 0..states {
        process.filter_into(&innov, n, &mut out);
        visit(weight, &out);
        // Odometer increment.
        for pos in 0..len {
            digits[pos] += 1;
            if digits[pos] < support.len() {
                innov[pos] = support[digits[pos]];
                break;
            }
            digits[pos] = 0;
            innov[pos] = support[0];
        }
    }
    Ok(states)
}

/// Exact `E f(X_0)` for a finite-support innovation law.
pub fn exact_mean(spec: &ProcessSpec, f: &Observable) -> Result<f64> {
    f.validate(spec.d)?;
    let mut mean = 0.0;
    enumerate(spec, 1, |w, x| mean += w * f.eval(x))?;
    Ok(mean)
}

/// Nondecreasing time tuples `0 = t_0 <= t_1 <= ... <= t_k <= n - 1`, one per
/// gap vector `(i_1, ..., i_k)` with `i_k* <= n - 1`.
fn time_tuples(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize];
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k + 1 {
            out.push(cur.clone());
            return;
        }
        let last = *cur.last().unwrap();
        for t in last..n {
            cur.push(t);
            rec(k, n, cur, out);
            cur.pop();
        }
    }
    rec(k, n, &mut cur, &mut out);
    out
}

/// Exact `E (sum f(X_i))^{2p}` and `I_n(0..=2p-1)` by enumerating the innovations.
pub fn exact_moment_oracle(spec: &ProcessSpec, f: &Observable, n: usize, p: usize) -> Result<OracleReport> {
    if n == 0 || p == 0 {
        return Err(Error::param("n and p must be positive"));
    }
    f.validate(spec.d)?;
    let d = spec.d;
    let order = 2 * p;
    let tuples: Vec<Vec<Vec<usize>>> = (0..order).map(|k| time_tuples(k, n)).collect();
    let mut products: Vec<Vec<f64>> = tuples.iter().map(|t| vec![0.0; t.len()]).collect();
    let mut moment = 0.0;
    let mut values = vec![0.0; n];
    let states = enumerate(spec, n, |w, path| {
        for (i, v) in values.iter_mut().enumerate() {
            *v = f.eval(&path[i * d..(i + 1) * d]);
        }
        moment += w * values.iter().sum::<f64>().powi(order as i32);
        for (ts, acc) in tuples.iter().zip(products.iter_mut()) {
            for (t, a) in ts.iter().zip(acc.iter_mut()) {
                *a += w * t.iter().map(|&i| values[i]).product::<f64>();
            }
        }
    })?;
    let i_table: Vec<f64> = products.iter().map(|acc| acc.iter().map(|v| v.abs()).sum()).collect();
    let factorial: f64 = (1..=order).map(|k| k as f64).product();
    let bound = factorial * n as f64 * i_table[order - 1];
    let mean = products[0][0];
    let holds = moment <= bound * (1.0 + 1e-12) + 1e-300;
    Ok(OracleReport { n, p, states, mean, moment, i_table, bound, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::partial_sum_moment;
    use crate::holder::HolderBump;
    use crate::processes::{CoefficientModel, InnovationLaw};

    fn geometric(j: usize) -> ProcessSpec {
        ProcessSpec::scalar(InnovationLaw::Rademacher, CoefficientModel::geometric(0.5, 1.0, Some(j)))
    }

    fn bump() -> Observable {
        Observable::bump(HolderBump::from_corners(&[-0.3], &[0.6], 1.0).unwrap())
    }

    #[test]
    fn tuples_match_composition_count() {
        // Gap vectors of length k with sum <= n - 1: C(n - 1 + k, k).
        assert_eq!(time_tuples(0, 5).len(), 1);
        assert_eq!(time_tuples(3, 6).len(), 56);
        assert_eq!(time_tuples(2, 4).len(), 10);
    }

    #[test]
    fn single_term_case() {
        let spec = geometric(2);
        let rep = exact_moment_oracle(&spec, &bump(), 1, 2).unwrap();
        // n = 1: I_1(3) = |E f^4| and the moment is E f^4.
        assert!((rep.i_table[3] - rep.moment).abs() < 1e-15);
        assert!(rep.holds);
        assert_eq!(rep.states, 8);
    }

    #[test]
    fn iid_centered_lag_terms_vanish() {
        let spec = ProcessSpec::iid(InnovationLaw::Rademacher);
        let raw = bump();
        let mean = exact_mean(&spec, &raw).unwrap();
        // f(-1) = 1, f(1) = 0.
        assert_eq!(mean, 0.5);
        let f = raw.shifted(mean);
        let rep = exact_moment_oracle(&spec, &f, 5, 1).unwrap();
        assert!(rep.i_table[0].abs() < 1e-15);
        // Only the zero gap contributes: I_n(1) = E f^2 = 1/4.
        assert!((rep.i_table[1] - 0.25).abs() < 1e-15);
        assert!((rep.moment - 5.0 * 0.25).abs() < 1e-12);
        assert!(rep.holds);
    }

    #[test]
    fn matches_monte_carlo() {
        let spec = geometric(3);
        let f = bump().shifted(exact_mean(&spec, &bump()).unwrap());
        let rep = exact_moment_oracle(&spec, &f, 6, 1).unwrap();
        assert!(rep.holds);
        let process = LinearProcess::new(spec).unwrap();
        let mc = partial_sum_moment(&process, &f, 6, 2, false, 50_000, 17).unwrap();
        assert!((mc.mean - rep.moment).abs() < 4.0 * mc.se, "{} vs {}", mc.mean, rep.moment);
    }

    #[test]
    fn budget_and_support_errors() {
        assert!(matches!(exact_moment_oracle(&geometric(20), &bump(), 8, 1), Err(Error::Resource(_))));
        let spec = ProcessSpec::iid(InnovationLaw::Uniform);
        assert!(matches!(exact_moment_oracle(&spec, &bump(), 2, 1), Err(Error::Parameter(_))));
    }
}
