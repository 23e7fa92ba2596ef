use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exponent bound `gamma_i < i/r + 2(p - i) - d` at one `i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaExponent {
    pub i: usize,
    /// `i / gamma` with `gamma = theta / alpha` (power rate family).
    pub gamma_i: f64,
    pub limit: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaCheck {
    /// `theta / alpha`.
    pub ratio: f64,
    /// `(p, r p / (p - r d))` for every integer `p > r d` in range.
    pub scanned: Vec<(usize, f64)>,
    pub best_p: Option<usize>,
    pub threshold: Option<f64>,
    pub feasible: bool,
    /// Exponent conditions at the best `p`.
    pub exponents: Vec<GammaExponent>,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must lie in (0, 1], got {v}")))
    }
}

fn check_rd(r: f64, d: usize) -> Result<()> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::param(format!("r must be finite and >= 1, got {r}")));
    }
    if d == 0 {
        return Err(Error::param("d must be at least 1"));
    }
    Ok(())
}

/// Scans integer `p` in `p_range` (inclusive) for the smallest `r p / (p - r d)`
/// over `p > r d` and compares it with `theta / alpha`.
pub fn condition_gamma_check(theta: f64, alpha: f64, r: f64, d: usize, p_range: (usize, usize)) -> Result<GammaCheck> {
    check_unit("theta", theta)?;
    check_unit("alpha", alpha)?;
    check_rd(r, d)?;
    let rd = r * d as f64;
    let ratio = theta / alpha;
    let scanned: Vec<(usize, f64)> = (p_range.0..=p_range.1)
        .filter(|&p| p as f64 > rd)
        .map(|p| (p, r * p as f64 / (p as f64 - rd)))
        .collect();
    let best = scanned.iter().copied().fold(None, |acc: Option<(usize, f64)>, (p, t)| match acc {
        Some((_, bt)) if bt <= t => acc,
        _ => Some((p, t)),
    });
    let feasible = best.is_some_and(|(_, t)| ratio > t);
    let exponents = match best {
        Some((p, _)) => (1..=p)
            .map(|i| {
                let gamma_i = i as f64 / ratio;
                let limit = i as f64 / r + 2.0 * (p - i) as f64 - d as f64;
                GammaExponent { i, gamma_i, limit, ok: gamma_i < limit }
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(GammaCheck { ratio, scanned, best_p: best.map(|b| b.0), threshold: best.map(|b| b.1), feasible, exponents })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayThreshold {
    pub b_star: f64,
    pub argmin_p: usize,
    /// `(p, (r/theta)(2p-1)p/(p-rd))` for every scanned `p`.
    pub values: Vec<(usize, f64)>,
}

/// Smallest `(r/theta)(2p - 1)p / (p - r d)` over integers `r d < p <= p_max`.
pub fn linear_decay_threshold(r: f64, theta: f64, d: usize, p_max: usize) -> Result<DecayThreshold> {
    check_unit("theta", theta)?;
    check_rd(r, d)?;
    let rd = r * d as f64;
    let values: Vec<(usize, f64)> = (1..=p_max)
        .filter(|&p| p as f64 > rd)
        .map(|p| {
            let pf = p as f64;
            (p, r / theta * (2.0 * pf - 1.0) * pf / (pf - rd))
        })
        .collect();
    let &(argmin_p, b_star) = values
        .iter()
        .fold(None, |acc: Option<&(usize, f64)>, v| match acc {
            Some(a) if a.1 <= v.1 => Some(a),
            _ => Some(v),
        })
        .ok_or_else(|| Error::param(format!("p_max = {p_max} must exceed r d = {rd}")))?;
    Ok(DecayThreshold { b_star, argmin_p, values })
}

/// Decay of the mixing rate `Theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThetaModel {
    /// `Theta(i) = (1 + i)^{-a}`.
    Power { a: f64 },
    /// `Theta(0), Theta(1), ...`.
    Table { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesCheck {
    pub converges: bool,
    /// Verdict comes from partial sums rather than a closed-form criterion.
    pub numerical: bool,
    /// `(N, sum_{i=0}^{N-1} i^{2p-2} Theta(i))` at decade cutoffs.
    pub partial_sums: Vec<(usize, f64)>,
}

/// Relative change over the last decade of terms below which a table is
/// declared convergent.
pub const STABILIZATION_TOLERANCE: f64 = 1e-6;

/// Convergence of `sum_i i^{2p-2} Theta(i)`.
pub fn theta_series_check(model: &ThetaModel, p: usize) -> Result<SeriesCheck> {
    if p == 0 {
        return Err(Error::param("p must be at least 1"));
    }
    let weight = |i: usize| if p == 1 { 1.0 } else { (i as f64).powi(2 * p as i32 - 2) };
    let partial = |len: usize, theta: &dyn Fn(usize) -> f64| -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        let mut next = 1;
        for i in 0..len {
            acc += weight(i) * theta(i);
            if i + 1 == next || i + 1 == len {
                out.push((i + 1, acc));
                next *= 10;
            }
        }
        out
    };
    match model {
        ThetaModel::Power { a } => {
            if !a.is_finite() {
                return Err(Error::param("decay exponent must be finite"));
            }
            let partial_sums = partial(1_000_000, &|i| (1.0 + i as f64).powf(-a));
            Ok(SeriesCheck { converges: *a > (2 * p - 1) as f64, numerical: false, partial_sums })
        }
        ThetaModel::Table { values } => {
            if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::param("Theta table entries must be finite and nonnegative"));
            }
            let partial_sums = partial(values.len(), &|i| values[i]);
            let n = values.len();
            let converges = n >= 10 && {
                let full = partial_sums.last().unwrap().1;
                let head: f64 = (0..n / 10).map(|i| weight(i) * values[i]).sum();
                full == 0.0 || (full - head).abs() <= STABILIZATION_TOLERANCE * full.abs()
            };
            Ok(SeriesCheck { converges, numerical: true, partial_sums })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_thresholds() {
        let c = condition_gamma_check(1.0, 1.0, 1.0, 1, (2, 2)).unwrap();
        assert_eq!(c.threshold, Some(2.0));
        assert!(!c.feasible);
        // theta = alpha gives ratio 1 and p/(p-1) > 1 for every p.
        let c = condition_gamma_check(0.5, 0.5, 1.0, 1, (1, 1000)).unwrap();
        assert!(!c.feasible);
        assert!(c.threshold.unwrap() > 1.0 && c.threshold.unwrap() < 1.002);
        let c = condition_gamma_check(1.0, 1.0, 2.0, 2, (1, 4)).unwrap();
        assert!(c.scanned.is_empty() && !c.feasible && c.best_p.is_none());
        assert!(condition_gamma_check(1.5, 1.0, 1.0, 1, (2, 3)).is_err());
    }

    #[test]
    fn linear_thresholds() {
        let t = linear_decay_threshold(1.0, 1.0, 1, 10).unwrap();
        assert_eq!((t.b_star, t.argmin_p), (6.0, 2));
        let t = linear_decay_threshold(1.0, 1.0, 2, 10).unwrap();
        assert_eq!((t.b_star, t.argmin_p), (14.0, 4));
        assert_eq!(t.values[0], (3, 15.0));
        let half = linear_decay_threshold(1.0, 0.5, 2, 10).unwrap();
        assert_eq!(half.b_star, 28.0);
        assert!(linear_decay_threshold(1.0, 1.0, 2, 2).is_err());
    }

    #[test]
    fn power_series_verdicts() {
        assert!(theta_series_check(&ThetaModel::Power { a: 4.0 }, 2).unwrap().converges);
        assert!(!theta_series_check(&ThetaModel::Power { a: 3.0 }, 2).unwrap().converges);
        let c = theta_series_check(&ThetaModel::Power { a: 2.0 }, 1).unwrap();
        assert!(c.converges && !c.numerical);
        let last = c.partial_sums.last().unwrap();
        assert_eq!(last.0, 1_000_000);
        assert!((last.1 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-5);
    }

    #[test]
    fn table_series_verdicts() {
        let fast: Vec<f64> = (0..200).map(|i| 0.5f64.powi(i)).collect();
        let c = theta_series_check(&ThetaModel::Table { values: fast }, 1).unwrap();
        assert!(c.converges && c.numerical);
        let slow: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert!(!theta_series_check(&ThetaModel::Table { values: slow }, 1).unwrap().converges);
    }
}
