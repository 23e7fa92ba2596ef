use std::fmt;
use std::ops::Index;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Point of `[-inf, inf]^d`. Comparisons are componentwise.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedPoint(Vec<f64>);

impl ExtendedPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::param("a point needs at least one coordinate"));
        }
        if coords.iter().any(|c| c.is_nan()) {
            return Err(Error::param("NaN coordinate"));
        }
        Ok(ExtendedPoint(coords))
    }

    /// `(v, ..., v)` in dimension `d`.
    pub fn splat(v: f64, d: usize) -> Self {
        ExtendedPoint(vec![v; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// `self <= x` in every coordinate.
    pub fn le(&self, x: &[f64]) -> bool {
        self.0.iter().zip(x).all(|(a, b)| a <= b)
    }

    /// `x <= self` in every coordinate, i.e. `x` lies in the orthant `[-inf, self]`.
    #[inline]
    pub fn dominates(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.0).all(|(a, b)| a <= b)
    }

    /// `self < other` strictly in every coordinate.
    pub fn strictly_below(&self, other: &Self) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a < b)
    }
}

impl Index<usize> for ExtendedPoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for ExtendedPoint {
    fn from(v: Vec<f64>) -> Self {
        ExtendedPoint(v)
    }
}

impl fmt::Display for ExtendedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", format_coord(*c))?;
        }
        write!(f, ")")
    }
}

pub(crate) fn format_coord(c: f64) -> String {
    if c == f64::INFINITY {
        "inf".into()
    } else if c == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        c.to_string()
    }
}

pub(crate) fn parse_coord(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("bad coordinate {t:?}")),
    }
}

/// Coordinates are written as decimal strings, with `inf` and `-inf` for the
/// infinite values; plain numbers are accepted on input as well.
impl Serialize for ExtendedPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|c| format_coord(*c)))
    }
}

impl<'de> Deserialize<'de> for ExtendedPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Coord {
            Num(f64),
            Text(String),
        }
        let raw = Vec::<Coord>::deserialize(d)?;
        let coords = raw
            .into_iter()
            .map(|c| match c {
                Coord::Num(v) => Ok(v),
                Coord::Text(t) => parse_coord(&t),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(de::Error::custom)?;
        ExtendedPoint::new(coords).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serde_uses_inf_tokens() {
        let p = ExtendedPoint::new(vec![f64::NEG_INFINITY, 0.5, f64::INFINITY]).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"["-inf","0.5","inf"]"#);
        assert_eq!(serde_json::from_str::<ExtendedPoint>(&json).unwrap(), p);
        let mixed: ExtendedPoint = serde_json::from_str(r#"[1.5, "-inf"]"#).unwrap();
        assert_eq!(mixed.coords(), &[1.5, f64::NEG_INFINITY]);
        assert!(serde_json::from_str::<ExtendedPoint>(r#"["nan"]"#).is_err());
    }

    #[test]
    fn componentwise_order() {
        let a = ExtendedPoint::new(vec![0.0, 0.0]).unwrap();
        let b = ExtendedPoint::new(vec![1.0, 1.0]).unwrap();
        assert!(a.strictly_below(&b));
        assert!(!b.strictly_below(&a));
        assert!(b.dominates(&[0.5, 1.0]));
        assert!(!b.dominates(&[0.5, 1.1]));
    }
}
