use std::io::Write;

use serde::Serialize;

use crate::{Error, Result};

/// `n x d` block of observations stored row-major, with the fingerprint of
/// the generating spec and the seed that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplePath {
    data: Vec<f64>,
    n: usize,
    d: usize,
    pub fingerprint: String,
    pub seed: u64,
}

impl SamplePath {
    /// Wraps row-major data. Fails on a size mismatch or non-finite entries.
    pub fn new(data: Vec<f64>, d: usize, fingerprint: impl Into<String>, seed: u64) -> Result<Self> {
        if d == 0 || !data.len().is_multiple_of(d) {
            return Err(Error::Shape(format!("{} values do not form rows of width {d}", data.len())));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite observation at flat index {pos}")));
        }
        Ok(SamplePath { n: data.len() / d, data, d, fingerprint: fingerprint.into(), seed })
    }

    /// Path built from explicit rows, mostly for tests and hand examples.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("rows of unequal length".into()));
        }
        Self::new(rows.concat(), d, "manual", 0)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Observation `X_{i+1}` (rows are zero-based).
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows `start .. start + len` as a new path.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n {
            return Err(Error::Size(format!("window {start}..{} exceeds length {}", start + len, self.n)));
        }
        Ok(SamplePath {
            data: self.data[start * self.d..(start + len) * self.d].to_vec(),
            n: len,
            d: self.d,
            fingerprint: self.fingerprint.clone(),
            seed: self.seed,
        })
    }

    /// CSV with header `x1,...,xd`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        w.write_record((1..=self.d).map(|j| format!("x{j}")))?;
        for row in self.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Delay vectors `Y_i = (X_i, ..., X_{i+dim-1})` of a scalar path.
pub fn time_delay_embed(path: &SamplePath, dim: usize) -> Result<SamplePath> {
    if path.dim() != 1 {
        return Err(Error::Shape(format!("delay embedding needs a scalar path, got d = {}", path.dim())));
    }
    if dim == 0 {
        return Err(Error::param("embedding dimension must be positive"));
    }
    if path.len() < dim {
        return Err(Error::Size(format!("path of length {} is shorter than dimension {dim}", path.len())));
    }
    let x = path.as_slice();
    let mut data = Vec::with_capacity((x.len() - dim + 1) * dim);
    for w in x.windows(dim) {
        data.extend_from_slice(w);
    }
    SamplePath::new(data, dim, format!("{}+delay{dim}", path.fingerprint), path.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_embedding_unrolls() {
        let p = SamplePath::from_rows(&[vec![1.0], vec![2.0], vec![3.0], vec![4.0]]).unwrap();
        let e = time_delay_embed(&p, 2).unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e.row(0), &[1.0, 2.0]);
        assert_eq!(e.row(1), &[2.0, 3.0]);
        assert_eq!(e.row(2), &[3.0, 4.0]);
        assert_eq!(time_delay_embed(&p, 1).unwrap().as_slice(), p.as_slice());
        assert!(matches!(time_delay_embed(&p, 5), Err(Error::Size(_))));
    }

    #[test]
    fn csv_header_and_rows() {
        let p = SamplePath::from_rows(&[vec![1.0, 0.5], vec![-2.0, 3.25]]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x1,x2\n1,0.5\n-2,3.25\n");
    }

    #[test]
    fn rejects_non_finite() {
        assert!(SamplePath::new(vec![1.0, f64::INFINITY], 1, "", 0).is_err());
        assert!(SamplePath::new(vec![1.0, 2.0, 3.0], 2, "", 0).is_err());
    }
}
