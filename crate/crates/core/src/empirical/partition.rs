use serde::Serialize;

use super::grid::EvalGrid;
use super::process::EmpiricalCdf;
use crate::holder::{CdfModel, HolderBump, MarginalCdf};
use crate::processes::SamplePath;
use crate::{Error, Result};

/// Largest number of cells a partition may have.
const MAX_CELLS: usize = 1 << 22;

/// Quantile partition `t_{i,j} = F_i^->(j/m)` for `j = 0..=m`, with
/// `t_{i,m+1} = t_{i,m}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionGrid {
    m: usize,
    marginals: Vec<MarginalCdf>,
    /// `corners[i][j]` for `j in 0..=m+1`.
    corners: Vec<Vec<f64>>,
}

/// Builds the equidistant-level partition. Marginals with jumps are rejected.
pub fn build_partition(marginals: &[MarginalCdf], m: usize) -> Result<PartitionGrid> {
    if m == 0 {
        return Err(Error::param("partition needs m >= 1"));
    }
    if marginals.is_empty() {
        return Err(Error::param("partition needs at least one marginal"));
    }
    if m.checked_pow(marginals.len() as u32).is_none_or(|c| c > MAX_CELLS) {
        return Err(Error::Size(format!("m^d = {m}^{} cells exceeds the limit {MAX_CELLS}", marginals.len())));
    }
    let mut corners = Vec::with_capacity(marginals.len());
    for (i, f) in marginals.iter().enumerate() {
        f.validate()?;
        if !f.is_continuous() {
            return Err(Error::param(format!("marginal {i} has jumps; the partition needs a continuous law")));
        }
        let mut row = (0..=m).map(|j| f.generalized_inverse(j as f64 / m as f64)).collect::<Result<Vec<_>>>()?;
        row.push(row[m]);
        corners.push(row);
    }
    Ok(PartitionGrid { m, marginals: marginals.to_vec(), corners })
}

impl PartitionGrid {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.corners.len()
    }

    /// Level spacing `h = 1/m`.
    pub fn h(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn marginals(&self) -> &[MarginalCdf] {
        &self.marginals
    }

    /// `t_{i,j}`, `j in 0..=m+1`.
    pub fn corner(&self, i: usize, j: usize) -> f64 {
        self.corners[i][j]
    }

    /// Corner point `t_j` for a multi-index `j in {0..m+1}^d`.
    pub fn corner_point(&self, j: &[usize]) -> Vec<f64> {
        j.iter().enumerate().map(|(i, ji)| self.corners[i][*ji]).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.m.pow(self.dim() as u32)
    }

    /// Multi-index `j in {1..m}^d` of the cell `[t_{j-1}, t_j)` holding `t`.
    pub fn cell_of(&self, t: &[f64]) -> Result<Vec<usize>> {
        if t.len() != self.dim() {
            return Err(Error::Shape(format!("point of dimension {} in a {}-d partition", t.len(), self.dim())));
        }
        t.iter()
            .enumerate()
            .map(|(i, x)| {
                let row = &self.corners[i];
                if !(*x >= row[0] && *x < row[self.m]) {
                    return Err(Error::Domain(format!("coordinate {i} = {x} outside [{}, {})", row[0], row[self.m])));
                }
                // Number of corners t_1..t_{m-1} that are <= x, plus one.
                Ok(1 + row[1..self.m].partition_point(|c| *c <= *x))
            })
            .collect()
    }

    /// Flat index of a cell multi-index (first coordinate fastest).
    pub fn flat_index(&self, j: &[usize]) -> usize {
        j.iter().rev().fold(0, |acc, ji| acc * self.m + (ji - 1))
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn cell_from_flat(&self, mut idx: usize) -> Vec<usize> {
        (0..self.dim())
            .map(|_| {
                let j = idx % self.m + 1;
                idx /= self.m;
                j
            })
            .collect()
    }

    /// The cell bump `phi_j^(m)`: `phi_(t_{j-2}, t_{j-1})` when every `j_i >= 2`,
    /// otherwise `None` (the zero function).
    pub fn cell_bump(&self, j: &[usize], alpha: f64) -> Result<Option<HolderBump>> {
        if j.iter().any(|ji| *ji < 2) {
            return Ok(None);
        }
        let lower: Vec<usize> = j.iter().map(|ji| ji - 2).collect();
        let upper: Vec<usize> = j.iter().map(|ji| ji - 1).collect();
        HolderBump::from_corners(&self.corner_point(&lower), &self.corner_point(&upper), alpha).map(Some)
    }
}

/// Smoothed empirical distribution `F_n^(m)` and the expectations
/// `F^(m) = E phi_j^(m)(X_0)` on every cell.
#[derive(Clone, Debug)]
pub struct SmoothedProcess {
    partition: PartitionGrid,
    bumps: Vec<Option<HolderBump>>,
    expectations: Vec<f64>,
    /// True when the expectations come from a reference sample.
    pub estimated: bool,
}

impl SmoothedProcess {
    pub fn new(partition: PartitionGrid, law: &CdfModel, alpha: f64) -> Result<Self> {
        if law.dim() != partition.dim() {
            return Err(Error::Shape("law and partition dimensions differ".into()));
        }
        let mut bumps = Vec::with_capacity(partition.cell_count());
        let mut expectations = Vec::with_capacity(partition.cell_count());
        for idx in 0..partition.cell_count() {
            let j = partition.cell_from_flat(idx);
            let bump = partition.cell_bump(&j, alpha)?;
            expectations.push(match &bump {
                Some(b) => b.expectation(law)?,
                None => 0.0,
            });
            bumps.push(bump);
        }
        let estimated = law.reference_sample().is_some() || law.estimated;
        Ok(SmoothedProcess { partition, bumps, expectations, estimated })
    }

    pub fn partition(&self) -> &PartitionGrid {
        &self.partition
    }

    pub fn bump(&self, flat: usize) -> Option<&HolderBump> {
        self.bumps[flat].as_ref()
    }

    pub fn expectation(&self, flat: usize) -> f64 {
        self.expectations[flat]
    }

    /// `(1/n) sum_i phi_j^(m)(X_i)` for every cell.
    pub fn cell_means(&self, path: &SamplePath) -> Vec<f64> {
        let n = path.len() as f64;
        self.bumps
            .iter()
            .map(|b| match b {
                Some(b) => path.rows().map(|x| b.eval(x)).sum::<f64>() / n,
                None => 0.0,
            })
            .collect()
    }

    /// `F_n^(m)(t)`.
    pub fn smoothed_cdf(&self, path: &SamplePath, t: &[f64]) -> Result<f64> {
        let j = self.partition.cell_of(t)?;
        let flat = self.partition.flat_index(&j);
        Ok(match &self.bumps[flat] {
            Some(b) => path.rows().map(|x| b.eval(x)).sum::<f64>() / path.len() as f64,
            None => 0.0,
        })
    }

    /// `U_n^(m)(t) = sqrt(n) (F_n^(m)(t) - F^(m)(t))`.
    pub fn value(&self, path: &SamplePath, t: &[f64]) -> Result<f64> {
        let j = self.partition.cell_of(t)?;
        let flat = self.partition.flat_index(&j);
        let fnm = self.smoothed_cdf(path, t)?;
        Ok((path.len() as f64).sqrt() * (fnm - self.expectations[flat]))
    }

    /// `U_n^(m)` over a grid, reusing the per-cell averages.
    pub fn values_on_grid(&self, path: &SamplePath, grid: &EvalGrid) -> Result<Vec<f64>> {
        let means = self.cell_means(path);
        let rn = (path.len() as f64).sqrt();
        grid.points
            .iter()
            .map(|t| {
                let flat = self.partition.flat_index(&self.partition.cell_of(t.coords())?);
                Ok(rn * (means[flat] - self.expectations[flat]))
            })
            .collect()
    }

    /// Grid maximum of `|U_n - U_n^(m)|`.
    pub fn approximation_gap(&self, path: &SamplePath, law: &CdfModel, grid: &EvalGrid) -> Result<f64> {
        let um = self.values_on_grid(path, grid)?;
        let fn_ = EmpiricalCdf::new(path);
        let rn = (path.len() as f64).sqrt();
        Ok(grid
            .points
            .iter()
            .zip(&um)
            .map(|(t, v)| (rn * (fn_.eval(t.coords()) - law.cdf(t.coords())) - v).abs())
            .fold(0.0, f64::max))
    }
}

/// `U_n^(m)(t)` for a single point.
pub fn smoothed_empirical_process(path: &SamplePath, sp: &SmoothedProcess, t: &[f64]) -> Result<f64> {
    sp.value(path, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::empirical_cdf;
    use crate::processes::{InnovationLaw, ProcessSpec, simulate_linear};

    #[test]
    fn uniform_partition_corners() {
        let p = build_partition(&[MarginalCdf::uniform01()], 4).unwrap();
        assert_eq!((0..=3).map(|j| p.corner(0, j)).collect::<Vec<_>>(), vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(p.corner(0, 4), f64::INFINITY);
        assert_eq!(p.corner(0, 5), f64::INFINITY);
        let single = build_partition(&[MarginalCdf::uniform01()], 1).unwrap();
        assert_eq!((single.corner(0, 0), single.corner(0, 1)), (0.0, f64::INFINITY));
        let g = build_partition(&[MarginalCdf::standard_normal()], 2).unwrap();
        assert!(g.corner(0, 1).abs() < 1e-12);
        assert_eq!(g.corner(0, 0), f64::NEG_INFINITY);
        assert!(build_partition(&[MarginalCdf::empirical(&[1.0, 2.0]).unwrap()], 2).is_err());
        assert!(build_partition(&[MarginalCdf::uniform01()], 0).is_err());
    }

    #[test]
    fn cells_and_indices() {
        let p = build_partition(&[MarginalCdf::uniform01(), MarginalCdf::uniform01()], 4).unwrap();
        assert_eq!(p.cell_of(&[0.0, 0.3]).unwrap(), vec![1, 2]);
        assert_eq!(p.cell_of(&[0.8, 0.75]).unwrap(), vec![4, 4]);
        assert!(matches!(p.cell_of(&[-0.1, 0.3]), Err(Error::Domain(_))));
        for idx in 0..16 {
            assert_eq!(p.flat_index(&p.cell_from_flat(idx)), idx);
        }
    }

    #[test]
    fn smoothed_values_and_sandwich() {
        let law = CdfModel::uniform01(1);
        let p = build_partition(&law.marginals, 4).unwrap();
        let sp = SmoothedProcess::new(p.clone(), &law, 1.0).unwrap();
        let path = simulate_linear(&ProcessSpec::iid(InnovationLaw::Uniform), 500, 3).unwrap();
        let path = SamplePath::new(
            path.as_slice().iter().map(|x| x / (2.0 * 3f64.sqrt()) + 0.5).collect(),
            1,
            "u01",
            3,
        )
        .unwrap();
        // First cell: j = 1 is not >= 2, so the smoothed CDF vanishes.
        assert_eq!(sp.smoothed_cdf(&path, &[0.1]).unwrap(), 0.0);
        for t in [0.3, 0.55, 0.6, 0.9] {
            let j = p.cell_of(&[t]).unwrap()[0];
            let v = sp.smoothed_cdf(&path, &[t]).unwrap();
            assert!(empirical_cdf(&path, &[p.corner(0, j - 2)]) <= v);
            assert!(v <= empirical_cdf(&path, &[p.corner(0, j - 1)]));
        }
        // E phi of cell 3 = E ramp((U - 0.5)/0.25) = 0.25 + 0.125.
        assert!((sp.expectation(2) - 0.375).abs() < 1e-12);
    }
}
