use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Pareto, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::rng;
use crate::{Error, Result};

/// Law of the i.i.d. innovations `xi_j`. Every kind is centered whenever its
/// mean exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InnovationLaw {
    StandardNormal,
    /// Uniform on `(-sqrt 3, sqrt 3)`, unit variance.
    Uniform,
    /// `+1` or `-1` with probability one half each.
    Rademacher,
    StudentT { nu: f64 },
    /// Random sign times a Pareto variable with scale 1.
    Pareto { tail_index: f64 },
}

impl InnovationLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InnovationLaw::StudentT { nu } if !(nu > 0.0 && nu.is_finite()) => {
                Err(Error::param(format!("student-t degrees of freedom must be positive, got {nu}")))
            }
            InnovationLaw::Pareto { tail_index } if !(tail_index > 0.0 && tail_index.is_finite()) => {
                Err(Error::param(format!("pareto tail index must be positive, got {tail_index}")))
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn sampler(&self) -> Result<InnovationSampler> {
        self.validate()?;
        Ok(match *self {
            InnovationLaw::StandardNormal => InnovationSampler::Normal,
            InnovationLaw::Uniform => InnovationSampler::Uniform,
            InnovationLaw::Rademacher => InnovationSampler::Rademacher,
            InnovationLaw::StudentT { nu } => InnovationSampler::StudentT(
                StudentT::new(nu).map_err(|e| Error::param(e.to_string()))?,
            ),
            InnovationLaw::Pareto { tail_index } => InnovationSampler::Pareto(
                Pareto::new(1.0, tail_index).map_err(|e| Error::param(e.to_string()))?,
            ),
        })
    }

    /// `E|xi|^s`, or `None` when the moment is infinite.
    pub fn abs_moment(&self, s: f64) -> Option<f64> {
        match *self {
            InnovationLaw::StandardNormal => {
                Some(2f64.powf(s / 2.0) * gamma((s + 1.0) / 2.0) / PI.sqrt())
            }
            InnovationLaw::Uniform => Some(3f64.powf(s / 2.0) / (s + 1.0)),
            InnovationLaw::Rademacher => Some(1.0),
            InnovationLaw::StudentT { nu } => (s < nu).then(|| {
                nu.powf(s / 2.0) * gamma((s + 1.0) / 2.0) * gamma((nu - s) / 2.0)
                    / (PI.sqrt() * gamma(nu / 2.0))
            }),
            InnovationLaw::Pareto { tail_index } => {
                (s < tail_index).then(|| tail_index / (tail_index - s))
            }
        }
    }

    pub fn has_finite_moment(&self, s: f64) -> bool {
        self.abs_moment(s).is_some()
    }

    /// Values of a finite-support law, each carrying equal mass.
    pub fn support(&self) -> Option<&'static [f64]> {
        match self {
            InnovationLaw::Rademacher => Some(&[-1.0, 1.0]),
            _ => None,
        }
    }

    /// Upper bound on `||xi - xi'||_s` for independent copies of a
    /// `q`-dimensional innovation vector (Euclidean norm on `R^q`).
    ///
    /// Exact for normal and Rademacher innovations; Minkowski bound
    /// `2 q ||xi_1||_s` otherwise.
    pub fn diff_norm_bound(&self, s: f64, q: usize) -> Result<f64> {
        if !(s >= 1.0) {
            return Err(Error::param(format!("moment order s must be >= 1, got {s}")));
        }
        let qf = q as f64;
        match self {
            InnovationLaw::StandardNormal => {
                // xi - xi' ~ N(0, 2 I_q), so the norm is sqrt 2 times a chi_q variable.
                let chi = 2f64.powf(s / 2.0) * gamma((qf + s) / 2.0) / gamma(qf / 2.0);
                Ok(2f64.sqrt() * chi.powf(1.0 / s))
            }
            InnovationLaw::Rademacher => {
                // Each coordinate differs by +-2 with probability 1/2.
                let mut acc = 0.0;
                for k in 0..=q {
                    let w = binomial(q, k) * 0.5f64.powi(q as i32);
                    acc += w * (4.0 * k as f64).powf(s / 2.0);
                }
                Ok(acc.powf(1.0 / s))
            }
            _ => {
                let m = self.abs_moment(s).ok_or_else(|| {
                    Error::Moment(format!("{self:?} has no finite moment of order {s}"))
                })?;
                Ok(2.0 * qf * m.powf(1.0 / s))
            }
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Clone, Debug)]
pub(crate) enum InnovationSampler {
    Normal,
    Uniform,
    Rademacher,
    StudentT(StudentT<f64>),
    Pareto(Pareto<f64>),
}

impl InnovationSampler {
    #[inline]
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InnovationSampler::Normal => StandardNormal.sample(rng),
            InnovationSampler::Uniform => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
            InnovationSampler::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            InnovationSampler::StudentT(t) => t.sample(rng),
            InnovationSampler::Pareto(p) => {
                let v = p.sample(rng);
                if rng.random::<bool>() {
                    v
                } else {
                    -v
                }
            }
        }
    }

    pub(crate) fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.draw(rng);
        }
    }
}

/// `count` i.i.d. innovation vectors of dimension `q`, flattened row-major.
/// The values depend only on `(law, count, q, seed)`.
pub fn generate_innovations(law: &InnovationLaw, count: usize, q: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 || q == 0 {
        return Err(Error::param("innovation count and dimension must be positive"));
    }
    let sampler = law.sampler()?;
    let mut rng = rng::stream(seed, rng::streams::PRIMARY);
    let mut out = vec![0.0; count * q];
    sampler.fill(&mut rng, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_support() {
        let v = generate_innovations(&InnovationLaw::Rademacher, 4, 1, 7).unwrap();
        assert!(v.iter().all(|x| *x == 1.0 || *x == -1.0));
    }

    #[test]
    fn normal_mean_within_clt_scale() {
        let n = 100_000;
        let v = generate_innovations(&InnovationLaw::StandardNormal, n, 1, 1).unwrap();
        let mean = v.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn deterministic() {
        let law = InnovationLaw::StudentT { nu: 5.0 };
        assert_eq!(
            generate_innovations(&law, 100, 2, 3).unwrap(),
            generate_innovations(&law, 100, 2, 3).unwrap()
        );
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(
            generate_innovations(&InnovationLaw::StudentT { nu: 0.0 }, 3, 1, 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            generate_innovations(&InnovationLaw::Pareto { tail_index: -1.0 }, 3, 1, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn sampled_abs_moments_match_closed_forms() {
        let n = 400_000;
        let laws = [
            InnovationLaw::StandardNormal,
            InnovationLaw::Uniform,
            InnovationLaw::Rademacher,
            InnovationLaw::StudentT { nu: 9.0 },
            InnovationLaw::Pareto { tail_index: 7.0 },
        ];
        for law in laws {
            let v = generate_innovations(&law, n, 1, 99).unwrap();
            for s in [1.0, 2.0] {
                let draws: Vec<f64> = v.iter().map(|x| x.abs().powf(s)).collect();
                let mean = draws.iter().sum::<f64>() / n as f64;
                let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                let se = (var / n as f64).sqrt();
                let exact = law.abs_moment(s).unwrap();
                assert!((mean - exact).abs() < 5.0 * se + 1e-12, "{law:?} s={s}: {mean} vs {exact}");
            }
        }
    }

    #[test]
    fn infinite_moments_detected() {
        assert!(!InnovationLaw::Pareto { tail_index: 2.0 }.has_finite_moment(2.0));
        assert!(!InnovationLaw::StudentT { nu: 3.0 }.has_finite_moment(4.0));
        assert!(InnovationLaw::StudentT { nu: 3.0 }.has_finite_moment(2.0));
    }

    #[test]
    fn diff_norms() {
        // Scalar Rademacher: |xi - xi'| is 0 or 2 with equal probability.
        let r = InnovationLaw::Rademacher.diff_norm_bound(2.0, 1).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let g = InnovationLaw::StandardNormal.diff_norm_bound(2.0, 1).unwrap();
        assert!((g - 2f64.sqrt()).abs() < 1e-12);
        let g3 = InnovationLaw::StandardNormal.diff_norm_bound(2.0, 3).unwrap();
        assert!((g3 - 6f64.sqrt()).abs() < 1e-12);
    }
}
