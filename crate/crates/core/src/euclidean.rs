//! The boundary model R^n united with an infinitely remote point.
//!
//! Carries the extended Euclidean metric, the bounded chordal metric
//! obtained by inverse stereographic projection onto the unit sphere of
//! R^{n+1} (north pole sent to the infinitely remote point), classical
//! circles and lines as circle generators, and the classical inversion
//! x -> c + r^2 (x - c) / |x - c|^2 realizing the metric inversion.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::metric::{MetricEvaluator, MoebiusMapHandle};
use crate::point::ExtendedPoint;
use crate::vecn;

/// The extended Euclidean model of dimension n.
#[derive(Clone)]
pub struct EuclideanModel {
    n: usize,
    metric: MetricEvaluator,
}

pub fn euclidean_model(n: usize) -> Result<EuclideanModel> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!(
            "dimension must be at least 1, got {n}"
        )));
    }
    let metric = MetricEvaluator::from_finite(format!("euclid-{n}"), vecn::dist);
    Ok(EuclideanModel { n, metric })
}

impl EuclideanModel {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> &MetricEvaluator {
        &self.metric
    }
}

/// Inverse stereographic projection onto the unit sphere of R^{n+1}.
/// The infinitely remote point goes to the north pole.
pub fn stereographic_lift(p: &ExtendedPoint, n: usize) -> Vec<f64> {
    match p.coords() {
        Some(x) => {
            let r2 = vecn::dot(x, x);
            let denom = 1.0 + r2;
            let mut out: Vec<f64> = x.iter().map(|xi| 2.0 * xi / denom).collect();
            out.push((r2 - 1.0) / denom);
            out
        }
        None => {
            let mut out = vec![0.0; n];
            out.push(1.0);
            out
        }
    }
}

/// The bounded chordal metric pulled back from the unit sphere of R^{n+1}.
/// Moebius equivalent to the extended Euclidean metric; it has no
/// infinitely remote point.
pub fn chordal_metric(n: usize) -> MetricEvaluator {
    MetricEvaluator::new(format!("chordal-{n}"), None, move |x, y| {
        vecn::dist(&stereographic_lift(x, n), &stereographic_lift(y, n))
    })
}

/// A circle through three points: a genuine round circle, or a straight
/// line closed up by the infinitely remote point. Both are parameterized
/// by an angle in [0, 2 pi); on a line the angle 0 is the infinitely
/// remote point and the finite part is swept by t = tan((angle - pi) / 2).
#[derive(Clone, Debug)]
pub enum EuclideanCircle {
    Round {
        center: Vec<f64>,
        radius: f64,
        e1: Vec<f64>,
        e2: Vec<f64>,
    },
    LineThroughInfinity {
        base: Vec<f64>,
        dir: Vec<f64>,
    },
}

impl EuclideanCircle {
    pub fn is_line(&self) -> bool {
        matches!(self, EuclideanCircle::LineThroughInfinity { .. })
    }

    pub fn at_angle(&self, theta: f64) -> ExtendedPoint {
        match self {
            EuclideanCircle::Round {
                center,
                radius,
                e1,
                e2,
            } => {
                let mut c = center.clone();
                for i in 0..c.len() {
                    c[i] += radius * (theta.cos() * e1[i] + theta.sin() * e2[i]);
                }
                ExtendedPoint::Finite { coords: c }
            }
            EuclideanCircle::LineThroughInfinity { base, dir } => {
                let wrapped = theta.rem_euclid(2.0 * PI);
                if wrapped == 0.0 {
                    return ExtendedPoint::Infinity;
                }
                let t = ((wrapped - PI) / 2.0).tan();
                ExtendedPoint::Finite {
                    coords: vecn::axpy(base, t, dir),
                }
            }
        }
    }

    /// `n` cyclically ordered samples.
    pub fn sample(&self, n: usize) -> Vec<ExtendedPoint> {
        (0..n)
            .map(|i| self.at_angle(2.0 * PI * i as f64 / n as f64))
            .collect()
    }
}

/// The circle through three pairwise distinct extended points. With one
/// infinitely remote entry, or with collinear finite entries, the result
/// is a line closed up through the infinitely remote point.
pub fn circle_through(
    p: &ExtendedPoint,
    q: &ExtendedPoint,
    r: &ExtendedPoint,
) -> Result<EuclideanCircle> {
    if p == q || q == r || p == r {
        return Err(Error::DegenerateTriple);
    }
    let infinities = [p, q, r].iter().filter(|x| x.is_infinite()).count();
    if infinities > 1 {
        return Err(Error::DegenerateTriple);
    }
    if infinities == 1 {
        let finite: Vec<&[f64]> = [p, q, r].iter().filter_map(|x| x.coords()).collect();
        let dir = vecn::normalize(&vecn::sub(finite[1], finite[0]))
            .ok_or(Error::DegenerateTriple)?;
        return Ok(EuclideanCircle::LineThroughInfinity {
            base: finite[0].to_vec(),
            dir,
        });
    }
    let a = p.expect_coords()?;
    let b = q.expect_coords()?;
    let c = r.expect_coords()?;
    let v1 = vecn::sub(b, a);
    let v2 = vecn::sub(c, a);
    let e1 = vecn::normalize(&v1).ok_or(Error::DegenerateTriple)?;
    let w = vecn::axpy(&v2, -vecn::dot(&v2, &e1), &e1);
    let scale = vecn::norm(&v1).max(vecn::norm(&v2));
    if vecn::norm(&w) <= 1e-12 * scale {
        // Collinear: the circle degenerates to a line through infinity.
        return Ok(EuclideanCircle::LineThroughInfinity {
            base: a.to_vec(),
            dir: e1,
        });
    }
    let e2 = vecn::normalize(&w).expect("nonzero by the collinearity test");
    // Plane coordinates of the three points: a = (0,0), b = (b1, 0), c.
    let b1 = vecn::norm(&v1);
    let c1 = vecn::dot(&v2, &e1);
    let c2 = vecn::dot(&v2, &e2);
    // Circumcenter from the two perpendicular bisector equations.
    let ux = b1 / 2.0;
    let uy = (c1 * c1 + c2 * c2 - b1 * c1) / (2.0 * c2);
    let radius = (ux * ux + uy * uy).sqrt();
    let mut center = a.to_vec();
    for i in 0..center.len() {
        center[i] += ux * e1[i] + uy * e2[i];
    }
    Ok(EuclideanCircle::Round {
        center,
        radius,
        e1,
        e2,
    })
}

/// Classical inversion in the sphere of radius `r` about `center`:
/// x -> center + r^2 (x - center) / |x - center|^2. Swaps the center with
/// the infinitely remote point, and pulls the extended Euclidean metric
/// back to its metric inversion about the center.
pub fn euclid_inversion(center: &ExtendedPoint, r: f64) -> Result<MoebiusMapHandle> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::RadiusNonPositive(r));
    }
    let c = center.expect_coords()?.to_vec();
    let r2 = r * r;
    let map = move |p: &ExtendedPoint| -> ExtendedPoint {
        match p.coords() {
            None => ExtendedPoint::Finite { coords: c.clone() },
            Some(x) => {
                let v = vecn::sub(x, &c);
                let n2 = vecn::dot(&v, &v);
                if n2 == 0.0 {
                    return ExtendedPoint::Infinity;
                }
                ExtendedPoint::Finite {
                    coords: vecn::axpy(&c, r2 / n2, &v),
                }
            }
        }
    };
    Ok(MoebiusMapHandle::involution(
        format!("euclid inversion r={r}"),
        map,
    ))
}
