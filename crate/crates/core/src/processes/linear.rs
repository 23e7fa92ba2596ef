use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::coefficients::CoefficientModel;
use super::innovation::{InnovationLaw, InnovationSampler};
use super::path::SamplePath;
use crate::holder::MarginalCdf;
use crate::rng::{self, streams};
use crate::{Error, Result};

/// Causal linear process `X_i = sum_{j=0}^{J} a_j xi_{i-j}` in `R^d` driven by
/// i.i.d. innovations in `R^q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub innovation: InnovationLaw,
    pub coefficients: CoefficientModel,
    pub d: usize,
    pub q: usize,
    /// Innovations drawn before `xi_1`; defaults to `J`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

impl ProcessSpec {
    /// Scalar spec with the given innovation law and coefficients.
    pub fn scalar(innovation: InnovationLaw, coefficients: CoefficientModel) -> Self {
        ProcessSpec { innovation, coefficients, d: 1, q: 1, burn_in: None }
    }

    /// Scalar i.i.d. sequence (`a_0 = 1`, `J = 0`).
    pub fn iid(innovation: InnovationLaw) -> Self {
        Self::scalar(innovation, CoefficientModel::identity(1))
    }

    /// Spec with the truncation lag and burn-in written out.
    pub fn resolved(&self) -> Self {
        let coefficients = self.coefficients.resolved();
        let burn_in = Some(self.burn_in.unwrap_or_else(|| coefficients.truncation_lag()));
        ProcessSpec { coefficients, burn_in, ..self.clone() }
    }

    /// First 16 hex digits of the SHA-256 of the resolved spec's JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(&self.resolved()).expect("spec serializes");
        Sha256::digest(&json).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Primary path and its coupled shadow. The shadow uses an independent copy
/// of every innovation at times `<= swap_point` and shares the rest.
#[derive(Clone, Debug)]
pub struct CoupledPath {
    pub primary: SamplePath,
    pub shadow: SamplePath,
    pub swap_point: usize,
}

/// Validated process ready for simulation.
#[derive(Clone, Debug)]
pub struct LinearProcess {
    spec: ProcessSpec,
    sampler: InnovationSampler,
    lag: usize,
    burn_in: usize,
    /// `a_j[r][c]` at `taps[(j * d + r) * q + c]`.
    taps: Vec<f64>,
    fingerprint: String,
}

impl LinearProcess {
    pub fn new(spec: ProcessSpec) -> Result<Self> {
        let sampler = spec.innovation.sampler()?;
        let (rows, cols) = spec.coefficients.validate()?;
        if spec.d == 0 || spec.q == 0 {
            return Err(Error::param("d and q must be positive"));
        }
        if (rows, cols) != (spec.d, spec.q) {
            return Err(Error::Shape(format!(
                "coefficients are {rows}x{cols} but d = {}, q = {}",
                spec.d, spec.q
            )));
        }
        let lag = spec.coefficients.truncation_lag();
        let burn_in = spec.burn_in.unwrap_or(lag);
        if burn_in < lag {
            return Err(Error::param(format!("burn_in {burn_in} is below the truncation lag {lag}")));
        }
        let mut taps = Vec::with_capacity((lag + 1) * rows * cols);
        for m in spec.coefficients.matrices()? {
            for r in 0..rows {
                for c in 0..cols {
                    taps.push(m[(r, c)]);
                }
            }
        }
        let fingerprint = spec.fingerprint();
        Ok(LinearProcess { spec, sampler, lag, burn_in, taps, fingerprint })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn d(&self) -> usize {
        self.spec.d
    }

    pub fn q(&self) -> usize {
        self.spec.q
    }

    /// Truncation lag `J`.
    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// Number of innovation values consumed by a path of length `n`.
    /// Position `p` of the buffer holds the innovation at time `p / q - burn_in + 1`.
    pub fn innovation_len(&self, n: usize) -> usize {
        (self.burn_in + n) * self.spec.q
    }

    /// Applies the filter to an innovation buffer of length
    /// [`innovation_len`](Self::innovation_len)`(n)`, writing `n * d` values.
    pub fn filter_into(&self, innovations: &[f64], n: usize, out: &mut [f64]) {
        let (d, q) = (self.spec.d, self.spec.q);
        debug_assert_eq!(innovations.len(), self.innovation_len(n));
        debug_assert_eq!(out.len(), n * d);
        if d == 1 && q == 1 {
            for (i, x) in out.iter_mut().enumerate() {
                let t = i + self.burn_in;
                *x = self.taps.iter().enumerate().map(|(j, a)| a * innovations[t - j]).sum();
            }
            return;
        }
        for i in 0..n {
            let t = i + self.burn_in;
            let x = &mut out[i * d..(i + 1) * d];
            x.fill(0.0);
            for j in 0..=self.lag {
                let xi = &innovations[(t - j) * q..(t - j + 1) * q];
                let a = &self.taps[j * d * q..(j + 1) * d * q];
                for (r, xr) in x.iter_mut().enumerate() {
                    *xr += a[r * q..(r + 1) * q].iter().zip(xi).map(|(u, v)| u * v).sum::<f64>();
                }
            }
        }
    }

    fn path_from(&self, innovations: &[f64], n: usize, seed: u64) -> Result<SamplePath> {
        let mut data = vec![0.0; n * self.spec.d];
        self.filter_into(innovations, n, &mut data);
        SamplePath::new(data, self.spec.d, self.fingerprint.clone(), seed)
    }

    fn draw_innovations(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut buf = vec![0.0; self.innovation_len(n)];
        self.sampler.fill(&mut rng::stream(seed, streams::PRIMARY), &mut buf);
        buf
    }

    /// Rows `X_1, ..., X_n`.
    pub fn simulate(&self, n: usize, seed: u64) -> Result<SamplePath> {
        if n == 0 {
            return Err(Error::param("path length must be positive"));
        }
        self.path_from(&self.draw_innovations(n, seed), n, seed)
    }

    /// Primary path (identical to [`simulate`](Self::simulate)) and a shadow
    /// whose innovations at times `<= swap_point` come from an independent stream.
    pub fn simulate_coupled(&self, n: usize, swap_point: usize, seed: u64) -> Result<CoupledPath> {
        if n == 0 {
            return Err(Error::param("path length must be positive"));
        }
        if swap_point > n {
            return Err(Error::param(format!("swap point {swap_point} outside 0..={n}")));
        }
        let innovations = self.draw_innovations(n, seed);
        let mut shadow = innovations.clone();
        let replaced = (self.burn_in + swap_point) * self.spec.q;
        self.sampler.fill(&mut rng::stream(seed, streams::COUPLING), &mut shadow[..replaced]);
        Ok(CoupledPath {
            primary: self.path_from(&innovations, n, seed)?,
            shadow: self.path_from(&shadow, n, seed)?,
            swap_point,
        })
    }

    /// Closed-form marginal laws, when the process has one of the supported shapes:
    /// normal innovations (exact for the truncated filter), a scaled uniform
    /// i.i.d. sequence, or a Rademacher geometric filter with `rho = 1/2`
    /// whose atoms are finer than `2^-20`.
    pub fn analytic_marginals(&self) -> Option<Vec<MarginalCdf>> {
        let (d, q) = (self.spec.d, self.spec.q);
        match (&self.spec.innovation, &self.spec.coefficients) {
            (InnovationLaw::StandardNormal, _) => Some(
                (0..d)
                    .map(|r| {
                        let var: f64 = (0..=self.lag)
                            .flat_map(|j| (0..q).map(move |c| (j, c)))
                            .map(|(j, c)| self.taps[(j * d + r) * q + c].powi(2))
                            .sum();
                        MarginalCdf::Gaussian { mean: 0.0, sd: var.sqrt() }
                    })
                    .collect::<Vec<_>>(),
            )
            .filter(|m| m.iter().all(|g| matches!(g, MarginalCdf::Gaussian { sd, .. } if *sd > 0.0))),
            (InnovationLaw::Uniform, _) if d == 1 && q == 1 && self.lag == 0 && self.taps[0] != 0.0 => {
                let h = 3f64.sqrt() * self.taps[0].abs();
                Some(vec![MarginalCdf::Uniform { lo: -h, hi: h }])
            }
            (InnovationLaw::Rademacher, CoefficientModel::Geometric { rho, scale, .. })
                if d == 1 && q == 1 && *rho == 0.5 && self.lag >= 19 && scale[0][0] != 0.0 =>
            {
                let h = 2.0 * scale[0][0].abs();
                Some(vec![MarginalCdf::Uniform { lo: -h, hi: h }])
            }
            _ => None,
        }
    }
}

/// Convenience wrapper around [`LinearProcess::simulate`].
pub fn simulate_linear(spec: &ProcessSpec, n: usize, seed: u64) -> Result<SamplePath> {
    LinearProcess::new(spec.clone())?.simulate(n, seed)
}

/// Convenience wrapper around [`LinearProcess::simulate_coupled`].
pub fn simulate_coupled(spec: &ProcessSpec, n: usize, swap_point: usize, seed: u64) -> Result<CoupledPath> {
    LinearProcess::new(spec.clone())?.simulate_coupled(n, swap_point, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::generate_innovations;

    fn geometric(law: InnovationLaw, j: usize) -> ProcessSpec {
        ProcessSpec::scalar(law, CoefficientModel::geometric(0.5, 1.0, Some(j)))
    }

    #[test]
    fn identity_filter_returns_innovations() {
        let spec = ProcessSpec::iid(InnovationLaw::StandardNormal);
        let path = simulate_linear(&spec, 50, 3).unwrap();
        assert_eq!(path.as_slice(), generate_innovations(&spec.innovation, 50, 1, 3).unwrap());
    }

    #[test]
    fn geometric_rademacher_is_bounded() {
        let path = simulate_linear(&geometric(InnovationLaw::Rademacher, 40), 5000, 9).unwrap();
        assert!(path.as_slice().iter().all(|x| x.abs() < 2.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = geometric(InnovationLaw::StandardNormal, 10);
        assert_eq!(simulate_linear(&spec, 100, 5).unwrap(), simulate_linear(&spec, 100, 5).unwrap());
        assert_ne!(simulate_linear(&spec, 100, 5).unwrap(), simulate_linear(&spec, 100, 6).unwrap());
    }

    #[test]
    fn changing_old_innovations_leaves_output_unchanged() {
        let proc = LinearProcess::new(ProcessSpec { burn_in: Some(6), ..geometric(InnovationLaw::StandardNormal, 4) })
            .unwrap();
        let n = 20;
        let base: Vec<f64> = (0..proc.innovation_len(n)).map(|p| (p as f64 * 0.37).sin()).collect();
        let mut x0 = vec![0.0; n];
        proc.filter_into(&base, n, &mut x0);
        for p in 0..base.len() {
            let mut bumped = base.clone();
            bumped[p] += 1.0;
            let mut x1 = vec![0.0; n];
            proc.filter_into(&bumped, n, &mut x1);
            for (row, (a, b)) in x0.iter().zip(&x1).enumerate() {
                // row r is time r + 1, position p is time p - burn_in + 1
                let lag = row as isize + 6 - p as isize;
                if !(0..=4).contains(&lag) {
                    assert_eq!(a, b, "position {p} moved row {row}");
                } else {
                    assert_ne!(a, b);
                }
            }
        }
    }

    #[test]
    fn coupling_shares_recent_innovations() {
        let proc = LinearProcess::new(geometric(InnovationLaw::StandardNormal, 3)).unwrap();
        let c = proc.simulate_coupled(30, 10, 4).unwrap();
        assert_eq!(c.primary, proc.simulate(30, 4).unwrap());
        for i in 0..30 {
            let time = i + 1;
            if time > 10 + 3 {
                assert_eq!(c.primary.row(i), c.shadow.row(i));
            } else {
                assert_ne!(c.primary.row(i), c.shadow.row(i));
            }
        }
        assert!(proc.simulate_coupled(30, 31, 4).is_err());
    }

    #[test]
    fn swap_zero_without_memory_changes_nothing() {
        let proc = LinearProcess::new(ProcessSpec::iid(InnovationLaw::Uniform)).unwrap();
        let c = proc.simulate_coupled(100, 0, 1).unwrap();
        assert_eq!(c.primary, c.shadow);
    }

    #[test]
    fn full_swap_is_uncorrelated() {
        let n = 20_000;
        let proc = LinearProcess::new(ProcessSpec::iid(InnovationLaw::StandardNormal)).unwrap();
        let c = proc.simulate_coupled(n, n, 2).unwrap();
        let cross: f64 =
            c.primary.as_slice().iter().zip(c.shadow.as_slice()).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        assert!(cross.abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn stationary_windows_agree() {
        let path = simulate_linear(&geometric(InnovationLaw::Uniform, 30), 20_000, 8).unwrap();
        let var = |s: &[f64]| s.iter().map(|x| x * x).sum::<f64>() / s.len() as f64;
        let (a, b) = path.as_slice().split_at(10_000);
        assert!((var(a) / var(b) - 1.0).abs() < 0.05);
    }

    #[test]
    fn shape_and_burn_in_validation() {
        let mut spec = geometric(InnovationLaw::Rademacher, 5);
        spec.burn_in = Some(2);
        assert!(LinearProcess::new(spec).is_err());
        let mut spec = geometric(InnovationLaw::Rademacher, 5);
        spec.d = 2;
        assert!(matches!(LinearProcess::new(spec), Err(Error::Shape(_))));
    }

    #[test]
    fn multivariate_filter_matches_direct_sum() {
        let spec = ProcessSpec {
            innovation: InnovationLaw::StandardNormal,
            coefficients: CoefficientModel::Explicit {
                matrices: vec![
                    vec![vec![1.0, 0.5], vec![0.0, 2.0], vec![-1.0, 1.0]],
                    vec![vec![0.3, 0.0], vec![0.1, -0.2], vec![0.0, 0.0]],
                ],
            },
            d: 3,
            q: 2,
            burn_in: Some(1),
        };
        let proc = LinearProcess::new(spec.clone()).unwrap();
        let xi = generate_innovations(&spec.innovation, 6, 2, 11).unwrap();
        let mut out = vec![0.0; 15];
        proc.filter_into(&xi, 5, &mut out);
        let m = spec.coefficients.matrices().unwrap();
        for i in 0..5 {
            for r in 0..3 {
                let mut want = 0.0;
                for j in 0..2 {
                    let t = i + 1 - j;
                    for c in 0..2 {
                        want += m[j][(r, c)] * xi[t * 2 + c];
                    }
                }
                assert!((out[i * 3 + r] - want).abs() < 1e-14);
            }
        }
        assert_eq!(proc.simulate(5, 11).unwrap().as_slice(), &out[..]);
    }

    #[test]
    fn fingerprint_tracks_spec() {
        let a = geometric(InnovationLaw::Rademacher, 5);
        let b = geometric(InnovationLaw::Rademacher, 6);
        assert_eq!(a.fingerprint().len(), 16);
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), a.resolved().fingerprint());
    }

    #[test]
    fn spec_round_trips_through_toml() {
        let text = r#"
d = 1
q = 1
[innovation]
kind = "student-t"
nu = 5.0
[coefficients]
kind = "geometric"
rho = 0.5
scale = [[1.0]]
J = 12
"#;
        let spec: ProcessSpec = toml::from_str(text).unwrap();
        assert_eq!(spec.coefficients.truncation_lag(), 12);
        let back: ProcessSpec = toml::from_str(&toml::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
        assert!(toml::from_str::<ProcessSpec>(&text.replace("rho", "rhoo")).is_err());
    }
}
