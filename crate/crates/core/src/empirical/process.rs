use super::grid::EvalGrid;
use crate::holder::CdfModel;
use crate::processes::SamplePath;
use crate::{Error, Result};

/// `F_n(t) = (1/n) #{i : X_i <= t}`.
pub fn empirical_cdf(path: &SamplePath, t: &[f64]) -> f64 {
    if path.is_empty() {
        return 0.0;
    }
    path.rows().filter(|x| x.iter().zip(t).all(|(a, b)| a <= b)).count() as f64 / path.len() as f64
}

/// Empirical CDF prepared for repeated evaluation: sorted values in
/// dimension one, raw rows otherwise.
#[derive(Clone, Debug)]
pub struct EmpiricalCdf<'a> {
    path: &'a SamplePath,
    sorted: Option<Vec<f64>>,
}

impl<'a> EmpiricalCdf<'a> {
    pub fn new(path: &'a SamplePath) -> Self {
        let sorted = (path.dim() == 1).then(|| {
            let mut v = path.as_slice().to_vec();
            v.sort_by(f64::total_cmp);
            v
        });
        EmpiricalCdf { path, sorted }
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        match &self.sorted {
            Some(v) => v.partition_point(|x| *x <= t[0]) as f64 / v.len() as f64,
            None => empirical_cdf(self.path, t),
        }
    }
}

/// `U_n(t) = sqrt(n) (F_n(t) - F(t))` at every grid point.
pub fn empirical_process(path: &SamplePath, law: &CdfModel, grid: &EvalGrid) -> Result<Vec<f64>> {
    if law.dim() != path.dim() || (!grid.is_empty() && grid.dim() != path.dim()) {
        return Err(Error::Shape(format!(
            "path dimension {}, law dimension {}, grid dimension {}",
            path.dim(),
            law.dim(),
            grid.dim()
        )));
    }
    let fn_ = EmpiricalCdf::new(path);
    let rn = (path.len() as f64).sqrt();
    Ok(grid
        .points
        .iter()
        .map(|t| {
            let f = law.cdf(t.coords());
            let v = rn * (fn_.eval(t.coords()) - f);
            // Both terms are exact at the corners of the extended space.
            if t.coords().iter().all(|c| *c == f64::INFINITY) || t.coords().contains(&f64::NEG_INFINITY) {
                0.0
            } else {
                v
            }
        })
        .collect())
}
