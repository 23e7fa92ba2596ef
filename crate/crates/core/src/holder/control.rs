use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cdf::MarginalCdf;
use crate::rng::{self, streams};
use crate::{Error, Result};

/// `Psi(z) = d * (w_F^<-(1/z))^(-alpha) + 1`, with the joint modulus `w_F`
/// bounded by the sum of the marginal moduli.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlFunction {
    pub alpha: f64,
    pub marginals: Vec<MarginalCdf>,
}

impl ControlFunction {
    pub fn new(alpha: f64, marginals: Vec<MarginalCdf>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if marginals.is_empty() {
            return Err(Error::param("control function needs at least one marginal"));
        }
        for m in &marginals {
            m.validate()?;
        }
        Ok(ControlFunction { alpha, marginals })
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    /// `min(sum_i w_{F_i}(delta), 1)`.
    pub fn joint_modulus(&self, delta: f64) -> Result<f64> {
        let mut s = 0.0;
        for m in &self.marginals {
            s += m.modulus(delta)?;
        }
        Ok(s.min(1.0))
    }

    /// `inf{delta > 0 : joint_modulus(delta) >= y}`.
    pub fn modulus_inverse(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        if y > 1.0 {
            return Ok(f64::INFINITY);
        }
        let d = self.dim() as f64;
        let first = &self.marginals[0];
        if self.marginals.iter().all(|m| m == first) {
            return first.modulus_inverse(y / d);
        }
        let mut hi = f64::INFINITY;
        for m in &self.marginals {
            hi = hi.min(m.modulus_inverse(y)?);
        }
        if !hi.is_finite() {
            return Ok(f64::INFINITY);
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.joint_modulus(mid)? >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// `Psi(z)` for `z > 0`. A vanishing inverse modulus (the distribution
    /// function jumps) is a [`Error::Singularity`].
    pub fn psi(&self, z: f64) -> Result<f64> {
        if !(z > 0.0) {
            return Err(Error::param(format!("control function argument must be positive, got {z}")));
        }
        let inv = self.modulus_inverse(1.0 / z)?;
        if inv == 0.0 {
            return Err(Error::Singularity(format!(
                "w_F^<-(1/{z}) = 0; the distribution function has a jump"
            )));
        }
        Ok(self.dim() as f64 * inv.powf(-self.alpha) + 1.0)
    }

    /// Right-hand side of the norm bound for a bump with corners `a < b`:
    /// `Psi(1 / min_i w_{F_i}(b_i - a_i))`.
    pub fn bump_bound(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let mut y = f64::INFINITY;
        for ((m, lo), hi) in self.marginals.iter().zip(a).zip(b) {
            y = y.min(m.modulus(hi - lo)?);
        }
        self.psi(1.0 / y)
    }
}

/// Lower estimate of a Hölder norm from finitely many probe pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub sup: f64,
    pub seminorm: f64,
    pub norm: f64,
    pub pairs: usize,
    pub method: &'static str,
}

/// Probe lattice sizes per dimension; `d >= 3` falls back to random pairs.
const LATTICE_1D: usize = 1024;
const LATTICE_2D: usize = 64;
const RANDOM_PAIRS: usize = 200_000;

/// Estimates `sup|f| + sup |f(x) - f(y)| / |x - y|^alpha` over the box
/// `[lo, hi]` (Euclidean distance). The result never exceeds the true norm.
pub fn estimate_holder_norm<F>(f: F, lo: &[f64], hi: &[f64], alpha: f64, seed: u64) -> Result<HolderEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    let d = lo.len();
    if d == 0 || hi.len() != d || lo.iter().zip(hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
        return Err(Error::param("probe box needs finite lo < hi in every coordinate"));
    }
    match d {
        1 => {
            let k = LATTICE_1D;
            let h = (hi[0] - lo[0]) / (k - 1) as f64;
            let vals: Vec<f64> = (0..k).map(|i| f(&[lo[0] + i as f64 * h])).collect();
            let weights: Vec<f64> = (0..k).map(|s| if s == 0 { 0.0 } else { (s as f64 * h).powf(-alpha) }).collect();
            let mut semi = 0.0f64;
            for i in 0..k {
                for j in i + 1..k {
                    semi = semi.max((vals[j] - vals[i]).abs() * weights[j - i]);
                }
            }
            Ok(finish(&vals, semi, k * (k - 1) / 2, "lattice"))
        }
        2 => {
            let k = LATTICE_2D;
            let hx = (hi[0] - lo[0]) / (k - 1) as f64;
            let hy = (hi[1] - lo[1]) / (k - 1) as f64;
            let mut vals = vec![0.0; k * k];
            for i in 0..k {
                for j in 0..k {
                    vals[i * k + j] = f(&[lo[0] + i as f64 * hx, lo[1] + j as f64 * hy]);
                }
            }
            let mut semi = 0.0f64;
            let mut pairs = 0usize;
            for di in 0..k as isize {
                for dj in -(k as isize - 1)..k as isize {
                    if di == 0 && dj <= 0 {
                        continue;
                    }
                    let w = ((di as f64 * hx).hypot(dj as f64 * hy)).powf(-alpha);
                    let (j0, j1) = if dj >= 0 { (0, k as isize - dj) } else { (-dj, k as isize) };
                    for i in 0..(k as isize - di) {
                        let row = (i * k as isize) as usize;
                        let row2 = ((i + di) * k as isize) as usize;
                        for j in j0..j1 {
                            let a = vals[row + j as usize];
                            let b = vals[row2 + (j + dj) as usize];
                            semi = semi.max((a - b).abs() * w);
                        }
                        pairs += (j1 - j0) as usize;
                    }
                }
            }
            Ok(finish(&vals, semi, pairs, "lattice"))
        }
        _ => {
            let mut rng = rng::stream(seed, streams::AUXILIARY);
            let mut x = vec![0.0; d];
            let mut y = vec![0.0; d];
            let mut sup = 0.0f64;
            let mut semi = 0.0f64;
            for _ in 0..RANDOM_PAIRS {
                // Mix long and short displacements so both regimes of the quotient are probed.
                let scale: f64 = 10f64.powf(-3.0 * rng.random::<f64>());
                for i in 0..d {
                    let w = hi[i] - lo[i];
                    x[i] = lo[i] + w * rng.random::<f64>();
                    y[i] = (x[i] + scale * w * (2.0 * rng.random::<f64>() - 1.0)).clamp(lo[i], hi[i]);
                }
                let (fx, fy) = (f(&x), f(&y));
                sup = sup.max(fx.abs()).max(fy.abs());
                let dist = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                if dist > 0.0 {
                    semi = semi.max((fx - fy).abs() / dist.powf(alpha));
                }
            }
            Ok(HolderEstimate { sup, seminorm: semi, norm: sup + semi, pairs: RANDOM_PAIRS, method: "random-pairs" })
        }
    }
}

fn finish(vals: &[f64], semi: f64, pairs: usize, method: &'static str) -> HolderEstimate {
    let sup = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    HolderEstimate { sup, seminorm: semi, norm: sup + semi, pairs, method }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaEstimate {
    pub constant: f64,
    pub used: usize,
    /// Coincident probe pairs that were skipped.
    pub skipped: usize,
}

/// `max |F(x) - F(y)| / |x - y|^theta` over probe pairs: a lower bound on
/// the theta-Hölder constant of `F`.
pub fn theta_holder_constant<F>(cdf: F, theta: f64, probes: &[(Vec<f64>, Vec<f64>)]) -> Result<ThetaEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::param(format!("theta must lie in (0, 1], got {theta}")));
    }
    if probes.is_empty() {
        return Err(Error::param("no probe pairs"));
    }
    let mut est = ThetaEstimate { constant: 0.0, used: 0, skipped: 0 };
    for (x, y) in probes {
        let dist = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if dist == 0.0 {
            est.skipped += 1;
            continue;
        }
        est.used += 1;
        est.constant = est.constant.max((cdf(x) - cdf(y)).abs() / dist.powf(theta));
    }
    if est.skipped > 0 {
        log::warn!("{} coincident probe pairs skipped", est.skipped);
    }
    Ok(est)
}
