//! Cross-ratio triples in simplex coordinates and their classification.
//!
//! A projective triple (a : b : c) of nonnegative reals is stored in the
//! normalization a + b + c = 1, which identifies the set of such triples
//! with the standard 2-simplex. The subset where the three entries satisfy
//! the triangle inequality is the middle triangle of the simplex, spanned
//! by (0, 1/2, 1/2), (1/2, 0, 1/2) and (1/2, 1/2, 0); a metric space whose
//! admissible quadruples always land there is a Ptolemy space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A normalized cross-ratio triple: entries nonnegative, summing to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossRatioTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CrossRatioTriple {
    /// Build from raw projective products, which may be zero or infinite.
    ///
    /// Exactly two infinite products with a finite third reduce to the
    /// (0 : 1 : 1) pattern, the continuity convention for quadruples in
    /// which the infinitely remote point occurs twice. Any other infinite
    /// or all-zero pattern has no consistent projective value.
    pub fn from_products(p: [f64; 3]) -> Result<Self> {
        if p.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::MetricDomain(format!(
                "cross-ratio products must be nonnegative, got {p:?}"
            )));
        }
        let infinite: Vec<usize> = (0..3).filter(|&i| p[i].is_infinite()).collect();
        match infinite.len() {
            0 => {
                let sum = p[0] + p[1] + p[2];
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::MetricDomain(format!(
                        "cross-ratio products {p:?} have no projective value"
                    )));
                }
                Ok(CrossRatioTriple {
                    a: p[0] / sum,
                    b: p[1] / sum,
                    c: p[2] / sum,
                })
            }
            2 => {
                let mut e = [0.5; 3];
                let finite = (0..3).find(|i| !infinite.contains(i)).unwrap();
                e[finite] = 0.0;
                Ok(CrossRatioTriple {
                    a: e[0],
                    b: e[1],
                    c: e[2],
                })
            }
            _ => Err(Error::MetricDomain(format!(
                "cross-ratio products {p:?} have an unsupported infinity pattern"
            ))),
        }
    }

    pub fn entries(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    /// Max-abs difference in simplex coordinates, the comparison metric
    /// used by every residual in the toolkit.
    pub fn simplex_distance(&self, other: &CrossRatioTriple) -> f64 {
        let s = self.entries();
        let o = other.entries();
        (0..3)
            .map(|i| (s[i] - o[i]).abs())
            .fold(0.0_f64, f64::max)
    }

    /// Signed slack of the triangle inequality: the minimum over the three
    /// entries of (sum of the other two) minus the entry. Nonnegative on
    /// the middle triangle, zero on its boundary.
    pub fn min_defect(&self) -> f64 {
        let m = self.a.max(self.b).max(self.c);
        1.0 - 2.0 * m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PtolemyTag {
    InteriorDelta,
    BoundaryDelta,
    Violation,
}

/// Classification of a triple relative to the middle triangle, together
/// with the signed slack (in simplex coordinates) that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PtolemyClass {
    pub tag: PtolemyTag,
    pub slack: f64,
}

pub fn classify_triple(t: &CrossRatioTriple, tol: f64) -> PtolemyClass {
    let slack = t.min_defect();
    let tag = if slack > tol {
        PtolemyTag::InteriorDelta
    } else if slack < -tol {
        PtolemyTag::Violation
    } else {
        PtolemyTag::BoundaryDelta
    };
    PtolemyClass { tag, slack }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn center_of_simplex_is_interior() {
        let t = CrossRatioTriple::from_products([1.0, 1.0, 1.0]).unwrap();
        assert_eq!(classify_triple(&t, TOL).tag, PtolemyTag::InteriorDelta);
        assert!((classify_triple(&t, TOL).slack - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn middle_triangle_vertex_is_boundary() {
        let t = CrossRatioTriple::from_products([0.0, 1.0, 1.0]).unwrap();
        assert_eq!(t.entries(), [0.0, 0.5, 0.5]);
        assert_eq!(classify_triple(&t, TOL).tag, PtolemyTag::BoundaryDelta);
    }

    #[test]
    fn dominant_entry_is_violation() {
        let t = CrossRatioTriple::from_products([0.6, 0.2, 0.2]).unwrap();
        let c = classify_triple(&t, TOL);
        assert_eq!(c.tag, PtolemyTag::Violation);
        assert!((c.slack + 0.2).abs() < 1e-15);
    }

    #[test]
    fn double_infinity_pattern() {
        let t = CrossRatioTriple::from_products([3.0, f64::INFINITY, f64::INFINITY]).unwrap();
        assert_eq!(t.entries(), [0.0, 0.5, 0.5]);
    }

    #[test]
    fn unsupported_patterns_error() {
        assert!(CrossRatioTriple::from_products([f64::INFINITY, 1.0, 1.0]).is_err());
        assert!(CrossRatioTriple::from_products([0.0, 0.0, 0.0]).is_err());
        assert!(CrossRatioTriple::from_products([f64::NAN, 1.0, 1.0]).is_err());
    }

    #[test]
    fn classification_is_permutation_invariant() {
        let perms = [
            [0usize, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let p = [0.3, 0.45, 0.25];
        let base = classify_triple(&CrossRatioTriple::from_products(p).unwrap(), TOL);
        for perm in perms {
            let q = [p[perm[0]], p[perm[1]], p[perm[2]]];
            let c = classify_triple(&CrossRatioTriple::from_products(q).unwrap(), TOL);
            assert_eq!(c.tag, base.tag);
            assert!((c.slack - base.slack).abs() < 1e-15);
        }
    }
}
