//! Extended points and admissible quadruples.
//!
//! A point of a model is either a finite coordinate tuple or the unique
//! infinitely remote point. Point equality is exact coordinate equality;
//! admissibility of a quadruple is a purely combinatorial condition on
//! repeated entries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A model point: a finite coordinate tuple or the infinitely remote point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExtendedPoint {
    Finite { coords: Vec<f64> },
    Infinity,
}

impl ExtendedPoint {
    /// A finite point. Rejects NaN and infinite components.
    pub fn finite(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(ExtendedPoint::Finite { coords })
    }

    pub fn infinity() -> Self {
        ExtendedPoint::Infinity
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedPoint::Infinity)
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            ExtendedPoint::Finite { coords } => Some(coords),
            ExtendedPoint::Infinity => None,
        }
    }

    pub fn expect_coords(&self) -> Result<&[f64]> {
        self.coords().ok_or(Error::InfinityNotProjectable)
    }
}

/// Shorthand used throughout tests and samplers.
pub fn pt(coords: &[f64]) -> ExtendedPoint {
    ExtendedPoint::Finite {
        coords: coords.to_vec(),
    }
}

/// Four extended points, the argument of a cross-ratio triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadruple(pub [ExtendedPoint; 4]);

impl Quadruple {
    pub fn new(
        x: ExtendedPoint,
        y: ExtendedPoint,
        z: ExtendedPoint,
        u: ExtendedPoint,
    ) -> Self {
        Quadruple([x, y, z, u])
    }

    /// Admissible iff no entry occurs three or four times.
    ///
    /// Equality of entries is exact coordinate equality, with no tolerance:
    /// admissibility is combinatorial, not metric.
    pub fn is_admissible(&self) -> bool {
        for i in 0..4 {
            let mut count = 0;
            for j in 0..4 {
                if self.0[i] == self.0[j] {
                    count += 1;
                }
            }
            if count >= 3 {
                return false;
            }
        }
        true
    }
}

pub fn is_admissible(q: &Quadruple) -> bool {
    q.is_admissible()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_entries_are_admissible() {
        let q = Quadruple::new(pt(&[0.0]), pt(&[1.0]), pt(&[2.0]), ExtendedPoint::Infinity);
        assert!(q.is_admissible());
    }

    #[test]
    fn triple_repeat_is_inadmissible() {
        let x = pt(&[1.0, 2.0]);
        let q = Quadruple::new(x.clone(), x.clone(), x.clone(), pt(&[0.0, 0.0]));
        assert!(!q.is_admissible());
        let q4 = Quadruple::new(x.clone(), x.clone(), x.clone(), x);
        assert!(!q4.is_admissible());
    }

    #[test]
    fn double_pair_is_admissible() {
        let x = pt(&[1.0]);
        let y = pt(&[2.0]);
        let q = Quadruple::new(x.clone(), x, y.clone(), y);
        assert!(q.is_admissible());
    }

    #[test]
    fn rejects_nan_coordinates() {
        assert!(ExtendedPoint::finite(vec![f64::NAN]).is_err());
        assert!(ExtendedPoint::finite(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn point_json_round_trip() {
        let p = pt(&[1.5, -2.0]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"kind":"finite","coords":[1.5,-2.0]}"#);
        let back: ExtendedPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let inf = ExtendedPoint::Infinity;
        let s = serde_json::to_string(&inf).unwrap();
        assert_eq!(s, r#"{"kind":"infinity"}"#);
    }
}
