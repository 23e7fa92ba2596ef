use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tail mass below which the default truncation lag stops.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;
/// Upper limit on the default truncation lag.
pub const MAX_DEFAULT_TRUNCATION: usize = 100_000;

/// Coefficient sequence `a_0, a_1, ...` of a causal linear filter, each a
/// `d x q` matrix given as a list of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientModel {
    /// `a_0 .. a_J` listed explicitly; the truncation lag is the list length minus one.
    Explicit { matrices: Vec<Vec<Vec<f64>>> },
    /// `a_j = scale * rho^j`.
    Geometric {
        rho: f64,
        scale: Vec<Vec<f64>>,
        #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
        truncation: Option<usize>,
    },
    /// `a_j = scale * (1 + j)^(-b - 1)`, so tail sums decay like `i^(-b)`.
    Polynomial {
        b: f64,
        scale: Vec<Vec<f64>>,
        #[serde(rename = "J", default, skip_serializing_if = "Option::is_none")]
        truncation: Option<usize>,
    },
}

fn to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Shape(format!("{what}: expected a non-empty rectangular matrix")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::param(format!("{what}: coefficients must be finite")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Spectral norm, the operator norm for Euclidean norms on both sides.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

impl CoefficientModel {
    /// `a_0 = I`, `J = 0`: the process is its innovation stream.
    pub fn identity(dim: usize) -> Self {
        CoefficientModel::Explicit {
            matrices: vec![(0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect()],
        }
    }

    pub fn geometric(rho: f64, scale: f64, truncation: Option<usize>) -> Self {
        CoefficientModel::Geometric { rho, scale: vec![vec![scale]], truncation }
    }

    pub fn polynomial(b: f64, scale: f64, truncation: Option<usize>) -> Self {
        CoefficientModel::Polynomial { b, scale: vec![vec![scale]], truncation }
    }

    /// Checks parameters and returns the `(d, q)` shape of the coefficients.
    pub fn validate(&self) -> Result<(usize, usize)> {
        match self {
            CoefficientModel::Explicit { matrices } => {
                let first = matrices
                    .first()
                    .ok_or_else(|| Error::param("explicit coefficients need at least a_0"))?;
                let m0 = to_matrix(first, "a_0")?;
                for (j, m) in matrices.iter().enumerate().skip(1) {
                    let mj = to_matrix(m, &format!("a_{j}"))?;
                    if mj.shape() != m0.shape() {
                        return Err(Error::Shape(format!("a_{j} shape differs from a_0")));
                    }
                }
                Ok(m0.shape())
            }
            CoefficientModel::Geometric { rho, scale, .. } => {
                if !(*rho > 0.0 && *rho < 1.0) {
                    return Err(Error::param(format!("geometric rho must lie in (0,1), got {rho}")));
                }
                Ok(to_matrix(scale, "scale")?.shape())
            }
            CoefficientModel::Polynomial { b, scale, .. } => {
                if !(*b > 0.0 && b.is_finite()) {
                    return Err(Error::param(format!("polynomial exponent b must be positive, got {b}")));
                }
                Ok(to_matrix(scale, "scale")?.shape())
            }
        }
    }

    /// Truncation lag `J`: explicit value, or the default lag at which the
    /// tail norm sum falls below `1e-8` of the head sum.
    pub fn truncation_lag(&self) -> usize {
        match self {
            CoefficientModel::Explicit { matrices } => matrices.len().saturating_sub(1),
            CoefficientModel::Geometric { rho, truncation, .. } => truncation.unwrap_or_else(|| {
                // tail / head = rho^(J+1) / (1 - rho^(J+1))
                let mut j = 0usize;
                while j < MAX_DEFAULT_TRUNCATION {
                    let t = rho.powi(j as i32 + 1);
                    if t / (1.0 - t) < DEFAULT_TAIL_TOLERANCE {
                        break;
                    }
                    j += 1;
                }
                j
            }),
            CoefficientModel::Polynomial { b, truncation, .. } => truncation.unwrap_or_else(|| {
                // tail <= (J+1)^(-b) / b and head >= 1
                let j = (1.0 / (b * DEFAULT_TAIL_TOLERANCE)).powf(1.0 / b).ceil() - 1.0;
                if j.is_finite() && j < MAX_DEFAULT_TRUNCATION as f64 {
                    j.max(0.0) as usize
                } else {
                    MAX_DEFAULT_TRUNCATION
                }
            }),
        }
    }

    /// Same model with the truncation lag made explicit.
    pub fn resolved(&self) -> Self {
        let lag = self.truncation_lag();
        match self.clone() {
            CoefficientModel::Geometric { rho, scale, .. } => {
                CoefficientModel::Geometric { rho, scale, truncation: Some(lag) }
            }
            CoefficientModel::Polynomial { b, scale, .. } => {
                CoefficientModel::Polynomial { b, scale, truncation: Some(lag) }
            }
            explicit => explicit,
        }
    }

    /// Matrices `a_0 .. a_J`.
    pub fn matrices(&self) -> Result<Vec<DMatrix<f64>>> {
        self.validate()?;
        let lag = self.truncation_lag();
        Ok(match self {
            CoefficientModel::Explicit { matrices } => matrices
                .iter()
                .enumerate()
                .map(|(j, m)| to_matrix(m, &format!("a_{j}")))
                .collect::<Result<_>>()?,
            CoefficientModel::Geometric { rho, scale, .. } => {
                let s = to_matrix(scale, "scale")?;
                (0..=lag).map(|j| &s * rho.powi(j as i32)).collect()
            }
            CoefficientModel::Polynomial { b, scale, .. } => {
                let s = to_matrix(scale, "scale")?;
                (0..=lag).map(|j| &s * (1.0 + j as f64).powf(-b - 1.0)).collect()
            }
        })
    }

    /// Operator norms `|a_0| .. |a_J|`.
    pub fn operator_norms(&self) -> Result<Vec<f64>> {
        match self {
            CoefficientModel::Explicit { .. } => {
                Ok(self.matrices()?.iter().map(operator_norm).collect())
            }
            CoefficientModel::Geometric { rho, scale, .. } => {
                self.validate()?;
                let s = operator_norm(&to_matrix(scale, "scale")?);
                Ok((0..=self.truncation_lag()).map(|j| s * rho.powi(j as i32)).collect())
            }
            CoefficientModel::Polynomial { b, scale, .. } => {
                self.validate()?;
                let s = operator_norm(&to_matrix(scale, "scale")?);
                Ok((0..=self.truncation_lag())
                    .map(|j| s * (1.0 + j as f64).powf(-b - 1.0))
                    .collect())
            }
        }
    }

    /// `sum_{j = lag}^{J} |a_j|` for the truncated filter; zero past `J`.
    pub fn tail_norm_sum(&self, lag: usize) -> Result<f64> {
        let lag_max = self.truncation_lag();
        if lag > lag_max {
            return Ok(0.0);
        }
        match self {
            CoefficientModel::Geometric { rho, scale, .. } => {
                self.validate()?;
                let s = operator_norm(&to_matrix(scale, "scale")?);
                let terms = (lag_max - lag + 1) as i32;
                Ok(s * rho.powi(lag as i32) * (1.0 - rho.powi(terms)) / (1.0 - rho))
            }
            _ => Ok(self.operator_norms()?[lag..].iter().rev().sum()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_norms() {
        let m = CoefficientModel::Geometric {
            rho: 0.5,
            scale: vec![vec![3.0, 0.0], vec![0.0, -4.0]],
            truncation: Some(5),
        };
        let norms = m.operator_norms().unwrap();
        assert_eq!(norms.len(), 6);
        for (j, n) in norms.iter().enumerate() {
            assert!((n - 4.0 * 0.5f64.powi(j as i32)).abs() < 1e-12);
        }
        let direct: f64 = norms[2..].iter().sum();
        assert!((m.tail_norm_sum(2).unwrap() - direct).abs() < 1e-12);
        assert_eq!(m.tail_norm_sum(6).unwrap(), 0.0);
    }

    #[test]
    fn default_truncation_meets_tolerance() {
        let g = CoefficientModel::geometric(0.5, 1.0, None);
        let lag = g.truncation_lag();
        let tail = 0.5f64.powi(lag as i32 + 1) / 0.5;
        let head = g.tail_norm_sum(0).unwrap();
        assert!(tail / head < DEFAULT_TAIL_TOLERANCE);
        assert!(lag < 40);

        let p = CoefficientModel::polynomial(2.0, 1.0, None);
        let lag = p.truncation_lag();
        assert!(lag > 1000 && lag < MAX_DEFAULT_TRUNCATION);
        // Integral bound on the remaining tail.
        let tail_bound = (lag as f64 + 1.0).powf(-2.0) / 2.0;
        assert!(tail_bound < DEFAULT_TAIL_TOLERANCE * p.tail_norm_sum(0).unwrap());

        // Very slow decay hits the cap.
        assert_eq!(CoefficientModel::polynomial(0.2, 1.0, None).truncation_lag(), MAX_DEFAULT_TRUNCATION);
    }

    #[test]
    fn polynomial_tail_rate() {
        let p = CoefficientModel::polynomial(2.0, 1.0, Some(1_000_000));
        let ratio = p.tail_norm_sum(200).unwrap() / p.tail_norm_sum(100).unwrap();
        assert!((ratio - 0.25).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CoefficientModel::geometric(1.0, 1.0, None).validate().is_err());
        assert!(CoefficientModel::polynomial(0.0, 1.0, None).validate().is_err());
        let ragged = CoefficientModel::Explicit { matrices: vec![vec![vec![1.0, 2.0], vec![1.0]]] };
        assert!(matches!(ragged.validate(), Err(Error::Shape(_))));
        let nan = CoefficientModel::Explicit { matrices: vec![vec![vec![f64::NAN]]] };
        assert!(nan.validate().is_err());
    }
}
