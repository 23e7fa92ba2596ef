use serde::Serialize;

use super::partition::PartitionGrid;
use crate::holder::HolderBump;
use crate::processes::SamplePath;
use crate::{Error, Result};

/// Deepest refinement accepted by [`build_chain_grid`].
pub const MAX_DEPTH: usize = 24;

/// Depth choice `K_n = floor(log2(16 d sqrt(n) h / eps))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KChoice {
    pub k: usize,
    /// Set when the log argument fell below one and the depth was clamped to 0.
    pub clamped: bool,
}

pub fn choose_k(n: usize, h: f64, d: usize, epsilon: f64) -> Result<KChoice> {
    if n == 0 || d == 0 || !(h > 0.0 && h <= 1.0) || !(epsilon > 0.0) {
        return Err(Error::param("choose_k needs n >= 1, d >= 1, h in (0, 1], epsilon > 0"));
    }
    let arg = 16.0 * d as f64 * (n as f64).sqrt() * h / epsilon;
    if arg < 1.0 {
        log::warn!("chain depth argument {arg} < 1; using K = 0");
        return Ok(KChoice { k: 0, clamped: true });
    }
    // Largest k with 2^k <= arg, tolerant to round-off in the product.
    let mut k = 0usize;
    while k < 62 && ((1u64 << (k + 1)) as f64) <= arg * (1.0 + 1e-12) {
        k += 1;
    }
    Ok(KChoice { k, clamped: false })
}

/// Refined partition `s^(k)_{i,j,l} = F_i^->((j - 1 + l 2^-k) / m)` for
/// `k <= K`, stored as one table per coordinate at depth `K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainGrid {
    base: PartitionGrid,
    depth: usize,
    alpha: f64,
    #[serde(skip)]
    table: Vec<Vec<f64>>,
}

pub fn build_chain_grid(base: &PartitionGrid, depth: usize) -> Result<ChainGrid> {
    if depth > MAX_DEPTH {
        return Err(Error::Size(format!("chain depth {depth} exceeds {MAX_DEPTH}")));
    }
    let steps = base.m() << depth;
    let table = base
        .marginals()
        .iter()
        .map(|f| (0..=steps).map(|p| f.generalized_inverse(p as f64 / steps as f64)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainGrid { base: base.clone(), depth, alpha: 1.0, table })
}

/// A chaining function: the constant patches or a bump.
#[derive(Clone, Debug, PartialEq)]
pub enum Psi {
    Zero,
    One,
    Bump(HolderBump),
}

impl Psi {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Psi::Zero => 0.0,
            Psi::One => 1.0,
            Psi::Bump(b) => b.eval(x),
        }
    }

    /// Analytic Hölder norm bound (exact for the constants).
    pub fn norm_bound(&self) -> f64 {
        match self {
            Psi::Zero => 0.0,
            Psi::One => 1.0,
            Psi::Bump(b) => b.holder_norm_bound(),
        }
    }
}

/// Terms of the telescoping decomposition at one point `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Telescope {
    /// `(1/n) sum_i (psi^(k)_{l(k,t)} - psi^(k-1)_{l(k-1,t)})(X_i)` for `k = 1..=K`.
    pub terms: Vec<f64>,
    /// `(1/n) sum_i (1{X_i <= t} - psi^(K)_{l(K,t)}(X_i))`.
    pub remainder: f64,
    /// `(1/n) sum_i 1{X_i <= t} - F_n^(m)(t)`.
    pub lhs: f64,
}

impl Telescope {
    pub fn total(&self) -> f64 {
        self.terms.iter().sum::<f64>() + self.remainder
    }
}

impl ChainGrid {
    /// Uses Hölder exponent `alpha` for the bumps it builds.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn base(&self) -> &PartitionGrid {
        &self.base
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    fn check_level(&self, k: usize) -> Result<()> {
        if k > self.depth {
            return Err(Error::param(format!("level {k} exceeds depth {}", self.depth)));
        }
        Ok(())
    }

    /// `s^(k)_{i,j,l}`; `l = -1` and `l = 2^k + 1` reach into the neighbouring
    /// cells, clamped at the ends of the level range.
    pub fn s(&self, i: usize, j: usize, k: usize, l: i64) -> Result<f64> {
        self.check_level(k)?;
        let top = (self.base.m() << k) as i64;
        let p = (((j as i64) - 1) * (1i64 << k) + l).clamp(0, top) as usize;
        Ok(self.table[i][p << (self.depth - k)])
    }

    /// Point `s^(k)_l` of cell `j`.
    pub fn s_point(&self, j: &[usize], k: usize, l: &[i64]) -> Result<Vec<f64>> {
        (0..self.dim()).map(|i| self.s(i, j[i], k, l[i])).collect()
    }

    /// Cell `j` of `t` and `l(k, t)`, the largest `l in 0..=2^k` per
    /// coordinate with `s^(k)_{i,j_i,l} <= t_i`.
    pub fn chain_indices(&self, t: &[f64], k: usize) -> Result<(Vec<usize>, Vec<i64>)> {
        self.check_level(k)?;
        let j = self.base.cell_of(t)?;
        let stride = 1usize << (self.depth - k);
        let mut l = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let start = (j[i] - 1) << self.depth;
            // s^(k)_{l} = table[start + l * stride]; count entries <= t_i.
            let (mut lo, mut hi) = (0usize, (1usize << k) + 1);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if self.table[i][start + mid * stride] <= t[i] {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            l.push(lo as i64 - 1);
        }
        Ok((j, l))
    }

    /// `psi^(k)_l` in cell `j`: zero if some `j_i = 1, l_i = 0`; one if some
    /// `j_i = m, l_i = 2^k + 1`; otherwise `phi_(s_{l-1}, s_l)`.
    pub fn psi(&self, j: &[usize], k: usize, l: &[i64]) -> Result<Psi> {
        self.check_level(k)?;
        let top = (1i64 << k) + 1;
        if l.iter().any(|li| *li < -1 || *li > top) {
            return Err(Error::param(format!("chain index {l:?} outside -1..={top}")));
        }
        if j.iter().zip(l).any(|(ji, li)| *ji == 1 && *li == 0) {
            return Ok(Psi::Zero);
        }
        if j.iter().zip(l).any(|(ji, li)| *ji == self.base.m() && *li == top) {
            return Ok(Psi::One);
        }
        let lower: Vec<i64> = l.iter().map(|li| li - 1).collect();
        Ok(Psi::Bump(HolderBump::from_corners(
            &self.s_point(j, k, &lower)?,
            &self.s_point(j, k, l)?,
            self.alpha,
        )?))
    }

    /// `psi^(k)_{l(k,t)}` for `k = 0..=K` and the upper cover `psi^(K)_{l(K,t)+2}`.
    pub fn chain_at(&self, t: &[f64]) -> Result<(Vec<Psi>, Psi)> {
        let mut chain = Vec::with_capacity(self.depth + 1);
        let mut last = None;
        for k in 0..=self.depth {
            let (j, l) = self.chain_indices(t, k)?;
            chain.push(self.psi(&j, k, &l)?);
            last = Some((j, l));
        }
        let (j, l) = last.expect("depth >= 0");
        let up: Vec<i64> = l.iter().map(|li| li + 2).collect();
        Ok((chain, self.psi(&j, self.depth, &up)?))
    }

    /// Telescoping decomposition of `(1/n) sum_i 1{X_i <= t} - F_n^(m)(t)`.
    pub fn telescope(&self, path: &SamplePath, t: &[f64]) -> Result<Telescope> {
        if path.dim() != self.dim() {
            return Err(Error::Shape("path and grid dimensions differ".into()));
        }
        let (chain, _) = self.chain_at(t)?;
        let n = path.len() as f64;
        let mut sums = vec![0.0; chain.len()];
        let mut ind = 0.0;
        for x in path.rows() {
            for (s, psi) in sums.iter_mut().zip(&chain) {
                *s += psi.eval(x);
            }
            if x.iter().zip(t).all(|(a, b)| a <= b) {
                ind += 1.0;
            }
        }
        let terms = (1..chain.len()).map(|k| (sums[k] - sums[k - 1]) / n).collect();
        Ok(Telescope { terms, remainder: (ind - sums[self.depth]) / n, lhs: (ind - sums[0]) / n })
    }

    /// Checks `phi_j <= psi^(1) <= ... <= psi^(K) <= 1{x <= t} <= psi^(K)_{l(K,t)+2}`
    /// at the point `x`.
    pub fn chain_inequalities_hold(&self, t: &[f64], x: &[f64]) -> Result<bool> {
        let (chain, cover) = self.chain_at(t)?;
        let vals: Vec<f64> = chain.iter().map(|p| p.eval(x)).collect();
        let ind = if x.iter().zip(t).all(|(a, b)| a <= b) { 1.0 } else { 0.0 };
        Ok(vals.windows(2).all(|w| w[0] <= w[1]) && vals[self.depth] <= ind && ind <= cover.eval(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::{build_partition, SmoothedProcess};
    use crate::holder::{CdfModel, MarginalCdf};
    use crate::processes::{simulate_linear, CoefficientModel, InnovationLaw, ProcessSpec};
    use proptest::prelude::*;

    fn uniform_chain(m: usize, d: usize, k: usize) -> ChainGrid {
        build_chain_grid(&build_partition(&vec![MarginalCdf::uniform01(); d], m).unwrap(), k).unwrap()
    }

    #[test]
    fn choose_k_examples() {
        assert_eq!(choose_k(100, 0.1, 1, 0.5).unwrap(), KChoice { k: 5, clamped: false });
        assert_eq!(choose_k(1, 1.0, 1, 16.0).unwrap(), KChoice { k: 0, clamped: false });
        assert_eq!(choose_k(1, 0.5, 1, 16.0).unwrap(), KChoice { k: 0, clamped: true });
        for n in [1, 7, 100, 12345] {
            let a = choose_k(n, 0.125, 2, 0.25).unwrap().k;
            let b = choose_k(2 * n, 0.125, 2, 0.25).unwrap().k;
            assert!(b == a || b == a + 1);
        }
    }

    #[test]
    fn refined_points() {
        let cg = uniform_chain(2, 1, 2);
        assert_eq!(cg.s(0, 1, 1, 1).unwrap(), 0.25);
        assert_eq!(cg.s(0, 1, 1, 1).unwrap(), cg.s(0, 1, 2, 2).unwrap());
        let k0 = uniform_chain(4, 1, 0);
        for j in 1..=4 {
            assert_eq!(k0.s(0, j, 0, 0).unwrap(), k0.base().corner(0, j - 1));
            assert_eq!(k0.s(0, j, 0, 1).unwrap(), k0.base().corner(0, j));
        }
        for k in 0..=2 {
            for j in 1..=2 {
                assert_eq!(cg.s(0, j, k, 0).unwrap(), cg.base().corner(0, j - 1));
                assert_eq!(cg.s(0, j, k, 1 << k).unwrap(), cg.base().corner(0, j));
                for l in 0..=(1i64 << (k.max(1) - 1)) {
                    if k >= 1 {
                        assert_eq!(cg.s(0, j, k - 1, l).unwrap(), cg.s(0, j, k, 2 * l).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn index_at_corner_and_level_zero() {
        let cg = uniform_chain(4, 2, 3);
        let (_, l) = cg.chain_indices(&[0.25 + 3.0 / 32.0, 0.6], 3).unwrap();
        assert_eq!(l[0], 3);
        let (_, l0) = cg.chain_indices(&[0.3, 0.6], 0).unwrap();
        assert_eq!(l0, vec![0, 0]);
    }

    #[test]
    fn level_zero_psi_is_the_cell_bump() {
        let cg = uniform_chain(4, 2, 2);
        for idx in 0..16 {
            let j = cg.base().cell_from_flat(idx);
            let psi = cg.psi(&j, 0, &[0, 0]).unwrap();
            match cg.base().cell_bump(&j, 1.0).unwrap() {
                None => assert_eq!(psi, Psi::Zero),
                Some(b) => assert_eq!(psi, Psi::Bump(b)),
            }
        }
    }

    #[test]
    fn telescope_with_zero_depth() {
        let cg = uniform_chain(8, 1, 0);
        let path = SamplePath::from_rows(&(0..50).map(|i| vec![(i as f64 * 0.37) % 1.0]).collect::<Vec<_>>()).unwrap();
        let tel = cg.telescope(&path, &[0.41]).unwrap();
        assert!(tel.terms.is_empty());
        assert_eq!(tel.remainder, tel.lhs);
        let sp = SmoothedProcess::new(cg.base().clone(), &CdfModel::uniform01(1), 1.0).unwrap();
        let fnm = sp.smoothed_cdf(&path, &[0.41]).unwrap();
        assert!((tel.lhs - (crate::empirical::empirical_cdf(&path, &[0.41]) - fnm)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_edges_keep_chain_order() {
        let base = build_partition(&[MarginalCdf::standard_normal()], 5).unwrap();
        let cg = build_chain_grid(&base, 4).unwrap();
        let path = simulate_linear(
            &ProcessSpec::scalar(InnovationLaw::StandardNormal, CoefficientModel::geometric(0.5, 1.0, Some(10))),
            300,
            2,
        )
        .unwrap();
        for t in [-3.0, -0.9, 0.0, 0.5, 2.5, f64::NEG_INFINITY] {
            for x in path.rows() {
                assert!(cg.chain_inequalities_hold(&[t], x).unwrap(), "t = {t}, x = {x:?}");
            }
            let tel = cg.telescope(&path, &[t]).unwrap();
            assert!((tel.total() - tel.lhs).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn halving_and_order(t0 in 0.0f64..1.0, t1 in 0.0f64..1.0, x0 in -0.2f64..1.2, x1 in -0.2f64..1.2) {
            let cg = uniform_chain(8, 2, 5);
            let t = [t0, t1];
            for k in 1..=5 {
                let (_, lk) = cg.chain_indices(&t, k).unwrap();
                let (_, lprev) = cg.chain_indices(&t, k - 1).unwrap();
                for i in 0..2 {
                    prop_assert_eq!(lk[i].div_euclid(2), lprev[i]);
                    prop_assert!(lk[i] < (1 << k));
                }
            }
            prop_assert!(cg.chain_inequalities_hold(&t, &[x0, x1]).unwrap());
        }
    }
}
