use rand::Rng;
use serde::Serialize;

use super::partition::PartitionGrid;
use crate::holder::ExtendedPoint;
use crate::rng::{self, streams};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    UniformLattice,
    Quantile,
    BoundaryAugmented,
}

/// Finite set of evaluation points standing in for `[-inf, inf]^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalGrid {
    pub points: Vec<ExtendedPoint>,
    pub kind: GridKind,
}

/// Largest float strictly below `x` (identity on `-inf`).
pub(crate) fn next_below(x: f64) -> f64 {
    if x == f64::NEG_INFINITY || x.is_nan() {
        return x;
    }
    if x == f64::INFINITY {
        return f64::MAX;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits - 1)
    } else {
        f64::from_bits(bits + 1)
    }
}

fn product(axes: &[Vec<f64>]) -> Vec<ExtendedPoint> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(ExtendedPoint::from).collect()
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl EvalGrid {
    /// `k` equispaced points per axis on `[lo, hi]`, product over `d` axes.
    pub fn uniform_lattice(lo: f64, hi: f64, k: usize, d: usize) -> Result<Self> {
        if k < 2 || !(lo < hi) || d == 0 {
            return Err(Error::param("lattice needs k >= 2, lo < hi, d >= 1"));
        }
        let axis: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
        Ok(EvalGrid { points: product(&vec![axis; d]), kind: GridKind::UniformLattice })
    }

    /// Product of the marginal quantiles `F_i^->(y)` at the given levels.
    pub fn quantile(marginals: &[crate::holder::MarginalCdf], levels: &[f64]) -> Result<Self> {
        let axes = marginals
            .iter()
            .map(|m| levels.iter().map(|y| m.generalized_inverse(*y)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(EvalGrid { points: product(&axes.into_iter().map(dedup_sorted).collect::<Vec<_>>()), kind: GridKind::Quantile })
    }

    /// Cell corners of every partition in `partitions`, the point just below
    /// each finite corner, and `random` points drawn from the marginal laws
    /// (one level per axis, product in `d >= 2`). Only points inside the
    /// partition domain `[t_0, t_m)` are kept.
    pub fn boundary_augmented(partitions: &[&PartitionGrid], random: usize, seed: u64) -> Result<Self> {
        let first = partitions.first().ok_or_else(|| Error::param("no partitions"))?;
        let d = first.dim();
        let mut rng = rng::stream(seed, streams::AUXILIARY);
        let mut axes = Vec::with_capacity(d);
        let per_axis = if d == 1 { random } else { (random as f64).powf(1.0 / d as f64).ceil() as usize };
        for i in 0..d {
            let mut axis = Vec::new();
            for p in partitions {
                for j in 0..p.m() {
                    let t = p.corner(i, j);
                    axis.push(t);
                    if j > 0 && t.is_finite() {
                        axis.push(next_below(t));
                    }
                }
            }
            let law = &first.marginals()[i];
            for _ in 0..per_axis {
                axis.push(law.generalized_inverse(rng.random::<f64>())?);
            }
            let (lo, hi) = (first.corner(i, 0), first.corner(i, first.m()));
            axis.retain(|v| *v >= lo && *v < hi);
            axes.push(dedup_sorted(axis));
        }
        Ok(EvalGrid { points: product(&axes), kind: GridKind::BoundaryAugmented })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, ExtendedPoint::dim)
    }
}

/// `max_k |a_k - b_k|` over a common grid.
pub fn sup_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("value arrays of length {} and {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holder::MarginalCdf;

    #[test]
    fn sup_distance_examples() {
        assert_eq!(sup_distance(&[1.0, 3.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert_eq!(sup_distance(&[1.0, 3.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert!(sup_distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn next_below_is_adjacent() {
        for x in [1.0, 0.25, -3.0, 1e-300, 0.0] {
            let y = next_below(x);
            assert!(y < x);
            assert!((y + x) / 2.0 == x || (y + x) / 2.0 == y);
        }
    }

    #[test]
    fn augmented_grid_contains_left_limits() {
        let p = crate::empirical::build_partition(&[MarginalCdf::uniform01()], 4).unwrap();
        let g = EvalGrid::boundary_augmented(&[&p], 10, 1).unwrap();
        let xs: Vec<f64> = g.points.iter().map(|p| p[0]).collect();
        assert!(xs.contains(&0.25) && xs.contains(&next_below(0.25)) && xs.contains(&0.0));
        assert!(xs.iter().all(|x| (0.0..f64::INFINITY).contains(x)));
        let lattice = EvalGrid::uniform_lattice(0.0, 1.0, 5, 2).unwrap();
        assert_eq!(lattice.len(), 25);
    }
}
