//! Extended metrics, cross-ratio triples, metric inversion and the
//! residual checks behind every Moebius-invariance suite.
//!
//! A `MetricEvaluator` is an immutable pairwise distance function on
//! extended points with at most one infinitely remote point omega, for
//! which d(x, omega) = infinity for all x != omega and d(omega, omega) = 0.
//! The infinitely remote point participates in arithmetic only through the
//! explicit conventions implemented here; any other infinity or NaN that
//! reaches a cross ratio is reported as an error, never passed on silently.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::{ExtendedPoint, Quadruple};
use crate::triple::{classify_triple, CrossRatioTriple, PtolemyClass, PtolemyTag};

type DistFn = dyn Fn(&ExtendedPoint, &ExtendedPoint) -> f64 + Send + Sync;
type MapFn = dyn Fn(&ExtendedPoint) -> ExtendedPoint + Send + Sync;

/// An immutable pairwise distance function on extended points.
#[derive(Clone)]
pub struct MetricEvaluator {
    dist_fn: Arc<DistFn>,
    omega: Option<ExtendedPoint>,
    label: String,
}

impl MetricEvaluator {
    pub fn new<F>(label: impl Into<String>, omega: Option<ExtendedPoint>, f: F) -> Self
    where
        F: Fn(&ExtendedPoint, &ExtendedPoint) -> f64 + Send + Sync + 'static,
    {
        MetricEvaluator {
            dist_fn: Arc::new(f),
            omega,
            label: label.into(),
        }
    }

    /// A metric whose infinitely remote point is `Infinity`, given its
    /// finite-pair distance. The extended conventions are supplied here.
    pub fn from_finite<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        MetricEvaluator::new(
            label,
            Some(ExtendedPoint::Infinity),
            move |x, y| match (x.coords(), y.coords()) {
                (Some(a), Some(b)) => f(a, b),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            },
        )
    }

    pub fn dist(&self, x: &ExtendedPoint, y: &ExtendedPoint) -> f64 {
        (self.dist_fn)(x, y)
    }

    pub fn omega(&self) -> Option<&ExtendedPoint> {
        self.omega.as_ref()
    }

    pub fn is_remote(&self, p: &ExtendedPoint) -> bool {
        self.omega.as_ref() == Some(p)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// The metric inversion of `d` of radius `r` with respect to `z`:
/// d_z(x, y) = r^2 d(x, y) / (d(z, x) d(z, y)), with d_z(x, z) = infinity,
/// d_z(z, z) = 0 and d_z(x, omega_old) = r^2 / d(x, z). The new infinitely
/// remote point is `z`.
pub fn m_invert(d: &MetricEvaluator, z: &ExtendedPoint, r: f64) -> Result<MetricEvaluator> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::RadiusNonPositive(r));
    }
    if d.is_remote(z) {
        return Err(Error::CenterIsOmega);
    }
    let base = d.clone();
    let center = z.clone();
    let old_omega = d.omega().cloned();
    let r2 = r * r;
    let label = format!("m-invert(r={r}) of {}", d.label());
    Ok(MetricEvaluator::new(
        label,
        Some(z.clone()),
        move |x, y| {
            let x_center = *x == center;
            let y_center = *y == center;
            if x_center && y_center {
                return 0.0;
            }
            if x_center || y_center {
                return f64::INFINITY;
            }
            let x_old = old_omega.as_ref() == Some(x);
            let y_old = old_omega.as_ref() == Some(y);
            match (x_old, y_old) {
                (true, true) => 0.0,
                (true, false) => r2 / base.dist(y, &center),
                (false, true) => r2 / base.dist(x, &center),
                (false, false) => {
                    r2 * base.dist(x, y) / (base.dist(&center, x) * base.dist(&center, y))
                }
            }
        },
    ))
}

/// A point map bundled with an optional inverse; its metric behavior is
/// checked against samples, never assumed.
#[derive(Clone)]
pub struct MoebiusMapHandle {
    forward: Arc<MapFn>,
    inverse: Option<Arc<MapFn>>,
    label: String,
}

impl MoebiusMapHandle {
    pub fn new<F>(label: impl Into<String>, forward: F) -> Self
    where
        F: Fn(&ExtendedPoint) -> ExtendedPoint + Send + Sync + 'static,
    {
        MoebiusMapHandle {
            forward: Arc::new(forward),
            inverse: None,
            label: label.into(),
        }
    }

    pub fn with_inverse<F, G>(label: impl Into<String>, forward: F, inverse: G) -> Self
    where
        F: Fn(&ExtendedPoint) -> ExtendedPoint + Send + Sync + 'static,
        G: Fn(&ExtendedPoint) -> ExtendedPoint + Send + Sync + 'static,
    {
        MoebiusMapHandle {
            forward: Arc::new(forward),
            inverse: Some(Arc::new(inverse)),
            label: label.into(),
        }
    }

    /// An involution is its own inverse.
    pub fn involution<F>(label: impl Into<String>, forward: F) -> Self
    where
        F: Fn(&ExtendedPoint) -> ExtendedPoint + Send + Sync + Clone + 'static,
    {
        let fwd = forward.clone();
        MoebiusMapHandle::with_inverse(label, forward, fwd)
    }

    pub fn identity() -> Self {
        MoebiusMapHandle::with_inverse("identity", |p| p.clone(), |p| p.clone())
    }

    pub fn apply(&self, p: &ExtendedPoint) -> ExtendedPoint {
        (self.forward)(p)
    }

    pub fn apply_inverse(&self, p: &ExtendedPoint) -> Option<ExtendedPoint> {
        self.inverse.as_ref().map(|f| f(p))
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Composition: `self` after `first`.
    pub fn compose(label: impl Into<String>, first: &Self, second: &Self) -> Self {
        let f1 = first.forward.clone();
        let f2 = second.forward.clone();
        let inverse = match (&first.inverse, &second.inverse) {
            (Some(i1), Some(i2)) => {
                let i1 = i1.clone();
                let i2 = i2.clone();
                Some(Arc::new(move |p: &ExtendedPoint| i1(&i2(p))) as Arc<MapFn>)
            }
            _ => None,
        };
        MoebiusMapHandle {
            forward: Arc::new(move |p| f2(&f1(p))),
            inverse,
            label: label.into(),
        }
    }
}

/// The pullback metric (x, y) -> d(f(x), f(y)). The infinitely remote point
/// of the result is the preimage of the one of `d` when the inverse of the
/// map is known.
pub fn pullback(d: &MetricEvaluator, f: &MoebiusMapHandle) -> MetricEvaluator {
    let omega = d
        .omega()
        .and_then(|w| f.apply_inverse(w));
    let base = d.clone();
    let map = f.clone();
    let label = format!("pullback of {} under {}", d.label(), f.label());
    MetricEvaluator::new(label, omega, move |x, y| {
        base.dist(&map.apply(x), &map.apply(y))
    })
}

/// The cross-ratio triple of an admissible quadruple with respect to `d`,
/// in simplex normalization.
///
/// The generic formula multiplies the three pairings of the four mutual
/// distances. Entries equal to the infinitely remote point of `d` are
/// handled by slot reduction: with one remote entry each product drops its
/// remote factor, with two remote entries the product pairing them is zero
/// and the remaining entries split evenly, the continuity convention.
pub fn cross_ratio(d: &MetricEvaluator, q: &Quadruple) -> Result<CrossRatioTriple> {
    if !q.is_admissible() {
        return Err(Error::InadmissibleQuadruple);
    }
    let e = &q.0;
    let remote: Vec<usize> = (0..4).filter(|&i| d.is_remote(&e[i])).collect();

    // The three products pair the slots as (01)(23), (02)(13), (03)(12).
    const PAIRS: [[(usize, usize); 2]; 3] = [
        [(0, 1), (2, 3)],
        [(0, 2), (1, 3)],
        [(0, 3), (1, 2)],
    ];

    let finite_dist = |i: usize, j: usize| -> Result<f64> {
        let v = d.dist(&e[i], &e[j]);
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(Error::MetricDomain(format!(
                "distance between slots {i} and {j} evaluated to {v}"
            )))
        }
    };

    let products = match remote.len() {
        0 => {
            let mut p = [0.0; 3];
            for (k, pairs) in PAIRS.iter().enumerate() {
                p[k] = pairs
                    .iter()
                    .map(|&(i, j)| finite_dist(i, j))
                    .collect::<Result<Vec<_>>>()?
                    .iter()
                    .product();
            }
            p
        }
        1 => {
            let w = remote[0];
            let mut p = [0.0; 3];
            for (k, pairs) in PAIRS.iter().enumerate() {
                // Drop the factor that contains the remote slot.
                let &(i, j) = pairs
                    .iter()
                    .find(|&&(i, j)| i != w && j != w)
                    .expect("each product has exactly one factor free of any given slot");
                p[k] = finite_dist(i, j)?;
            }
            p
        }
        2 => {
            let (i, j) = (remote[0], remote[1]);
            let zero_slot = PAIRS
                .iter()
                .position(|pairs| {
                    pairs
                        .iter()
                        .any(|&(a, b)| (a == i && b == j) || (a == j && b == i))
                })
                .ok_or(Error::InadmissibleQuadruple)?;
            let mut p = [f64::INFINITY; 3];
            p[zero_slot] = 0.0;
            return CrossRatioTriple::from_products(p);
        }
        _ => return Err(Error::InadmissibleQuadruple),
    };
    CrossRatioTriple::from_products(products)
}

/// Max simplex-coordinate distance between the cross-ratio triples of the
/// quadruples and of their images under `f`. Zero for a Moebius map.
pub fn moebius_residual(
    d: &MetricEvaluator,
    f: &MoebiusMapHandle,
    quads: &[Quadruple],
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for q in quads {
        let before = cross_ratio(d, q)?;
        let image = Quadruple([
            f.apply(&q.0[0]),
            f.apply(&q.0[1]),
            f.apply(&q.0[2]),
            f.apply(&q.0[3]),
        ]);
        let after = cross_ratio(d, &image)?;
        worst = worst.max(before.simplex_distance(&after));
    }
    Ok(worst)
}

/// Max simplex-coordinate disagreement of cross-ratio triples evaluated in
/// two metrics. Zero iff the metrics are Moebius equivalent on the samples.
pub fn metric_crt_agreement(
    d1: &MetricEvaluator,
    d2: &MetricEvaluator,
    quads: &[Quadruple],
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for q in quads {
        let t1 = cross_ratio(d1, q)?;
        let t2 = cross_ratio(d2, q)?;
        worst = worst.max(t1.simplex_distance(&t2));
    }
    Ok(worst)
}

/// Report of a random quadruple scan.
#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub n: u64,
    pub min_slack: f64,
    pub violations: u64,
    pub worst: Quadruple,
}

/// Classify `n` random admissible quadruples drawn from `sampler` and
/// report the minimum triangle-inequality slack seen, together with the
/// quadruple that attained it. In a Ptolemy space the minimum stays above
/// minus the classification tolerance.
pub fn ptolemy_scan<R: Rng>(
    d: &MetricEvaluator,
    sampler: &mut dyn FnMut(&mut R) -> ExtendedPoint,
    rng: &mut R,
    n: u64,
    tol: f64,
) -> Result<ScanReport> {
    let mut min_slack = f64::INFINITY;
    let mut violations = 0;
    let mut worst: Option<Quadruple> = None;
    let mut done = 0;
    let mut attempts = 0;
    while done < n {
        attempts += 1;
        if attempts > 20 * n + 100 {
            return Err(Error::InvalidArgument(
                "sampler keeps producing inadmissible quadruples".into(),
            ));
        }
        let q = Quadruple([
            sampler(rng),
            sampler(rng),
            sampler(rng),
            sampler(rng),
        ]);
        if !q.is_admissible() {
            continue;
        }
        let t = cross_ratio(d, &q)?;
        let PtolemyClass { tag, slack } = classify_triple(&t, tol);
        if tag == PtolemyTag::Violation {
            violations += 1;
        }
        if slack < min_slack {
            min_slack = slack;
            worst = Some(q);
        }
        done += 1;
    }
    Ok(ScanReport {
        n,
        min_slack,
        violations,
        worst: worst.expect("n >= 1"),
    })
}

/// Max deviation from the circle equality over quadruples taken in cyclic
/// order from `pts` (the separating pairing is slots (0,2) | (1,3)). The
/// deviation is the absolute triangle slack of the cross-ratio triple in
/// simplex coordinates, which vanishes exactly on the boundary pattern the
/// equality describes.
///
/// To keep the combinatorics bounded, at most 24 of the supplied points are
/// used, evenly strided in the given cyclic order.
pub fn circle_residual(d: &MetricEvaluator, pts: &[ExtendedPoint]) -> Result<f64> {
    if pts.len() < 4 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let capped: Vec<&ExtendedPoint> = if pts.len() <= 24 {
        pts.iter().collect()
    } else {
        let stride = pts.len() as f64 / 24.0;
        (0..24)
            .map(|k| &pts[(k as f64 * stride) as usize])
            .collect()
    };
    let m = capped.len();
    let mut worst = 0.0_f64;
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                for l in (k + 1)..m {
                    let q = Quadruple([
                        capped[i].clone(),
                        capped[j].clone(),
                        capped[k].clone(),
                        capped[l].clone(),
                    ]);
                    if !q.is_admissible() {
                        continue;
                    }
                    let t = cross_ratio(d, &q)?;
                    worst = worst.max(t.min_defect().abs());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::pt;
    use crate::vecn;

    fn euclid_line() -> MetricEvaluator {
        MetricEvaluator::from_finite("euclid-1d", |a, b| (a[0] - b[0]).abs())
    }

    fn euclid_plane() -> MetricEvaluator {
        MetricEvaluator::from_finite("euclid-2d", vecn::dist)
    }

    #[test]
    fn one_infinity_convention() {
        // crt(0, 1, 2, inf) on the line reduces to (1 : 2 : 1).
        let d = euclid_line();
        let q = Quadruple::new(pt(&[0.0]), pt(&[1.0]), pt(&[2.0]), ExtendedPoint::Infinity);
        let t = cross_ratio(&d, &q).unwrap();
        assert_eq!(t.entries(), [0.25, 0.5, 0.25]);
    }

    #[test]
    fn two_infinity_convention() {
        let d = euclid_line();
        let q = Quadruple::new(
            pt(&[0.0]),
            pt(&[1.0]),
            ExtendedPoint::Infinity,
            ExtendedPoint::Infinity,
        );
        let t = cross_ratio(&d, &q).unwrap();
        assert_eq!(t.entries(), [0.0, 0.5, 0.5]);
    }

    #[test]
    fn repeated_pair_degeneracy() {
        // The products of (x, y, x, y) are (d^2, 0, d^2); the zero lands in
        // the slot whose pairing joins the coincident entries.
        let d = euclid_line();
        let q = Quadruple::new(pt(&[0.0]), pt(&[1.0]), pt(&[0.0]), pt(&[1.0]));
        let t = cross_ratio(&d, &q).unwrap();
        assert_eq!(t.entries(), [0.5, 0.0, 0.5]);
        assert_eq!(
            classify_triple(&t, 1e-12).tag,
            PtolemyTag::BoundaryDelta
        );
    }

    #[test]
    fn inadmissible_is_rejected() {
        let d = euclid_line();
        let x = pt(&[0.0]);
        let q = Quadruple::new(x.clone(), x.clone(), x.clone(), pt(&[1.0]));
        assert!(matches!(
            cross_ratio(&d, &q),
            Err(Error::InadmissibleQuadruple)
        ));
    }

    #[test]
    fn m_invert_formula_and_conventions() {
        let d = euclid_line();
        let z = pt(&[0.0]);
        let dz = m_invert(&d, &z, 1.0).unwrap();
        // d_z(1, 2) = d(1,2) / (d(0,1) d(0,2)) = 1/2.
        assert!((dz.dist(&pt(&[1.0]), &pt(&[2.0])) - 0.5).abs() < 1e-15);
        // The center is infinitely remote for the inverted metric.
        assert_eq!(dz.dist(&pt(&[1.0]), &z), f64::INFINITY);
        assert_eq!(dz.dist(&z, &z), 0.0);
        // The old infinitely remote point is at distance r^2 / d(x, z).
        assert!((dz.dist(&pt(&[4.0]), &ExtendedPoint::Infinity) - 0.25).abs() < 1e-15);
        assert!(dz.is_remote(&z));
    }

    #[test]
    fn m_invert_errors() {
        let d = euclid_line();
        assert!(matches!(
            m_invert(&d, &pt(&[0.0]), 0.0),
            Err(Error::RadiusNonPositive(_))
        ));
        assert!(matches!(
            m_invert(&d, &ExtendedPoint::Infinity, 1.0),
            Err(Error::CenterIsOmega)
        ));
    }

    #[test]
    fn m_invert_radius_one_is_involutive() {
        let d = euclid_plane();
        let z = pt(&[0.3, -0.7]);
        let dz = m_invert(&d, &z, 1.0).unwrap();
        let back = m_invert(&dz, &ExtendedPoint::Infinity, 1.0).unwrap();
        let samples = [
            (pt(&[1.0, 0.0]), pt(&[0.0, 2.0])),
            (pt(&[-1.5, 2.5]), pt(&[4.0, 4.0])),
            (pt(&[0.1, 0.1]), pt(&[-0.2, 0.4])),
        ];
        for (x, y) in samples {
            let orig = d.dist(&x, &y);
            let roundtrip = back.dist(&x, &y);
            assert!((orig - roundtrip).abs() / orig < 1e-12);
        }
    }

    #[test]
    fn m_inverted_metric_is_moebius_equivalent() {
        let d = euclid_plane();
        let z = pt(&[0.25, 0.5]);
        let dz = m_invert(&d, &z, 1.0).unwrap();
        let quads = vec![
            Quadruple::new(pt(&[1.0, 0.0]), pt(&[0.0, 1.0]), pt(&[-1.0, 0.2]), pt(&[2.0, 2.0])),
            Quadruple::new(pt(&[3.0, 1.0]), pt(&[0.4, -1.0]), pt(&[-2.0, 0.0]), pt(&[1.0, 1.0])),
        ];
        let res = metric_crt_agreement(&d, &dz, &quads).unwrap();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn identity_pullback_and_residual() {
        let d = euclid_plane();
        let id = MoebiusMapHandle::identity();
        let pulled = pullback(&d, &id);
        let x = pt(&[1.0, 2.0]);
        let y = pt(&[-1.0, 0.5]);
        assert_eq!(pulled.dist(&x, &y), d.dist(&x, &y));
        let quads = vec![Quadruple::new(
            pt(&[0.0, 0.0]),
            pt(&[1.0, 0.0]),
            pt(&[0.0, 1.0]),
            pt(&[1.0, 1.0]),
        )];
        assert_eq!(moebius_residual(&d, &id, &quads).unwrap(), 0.0);
    }

    #[test]
    fn perturbed_map_is_detected() {
        // Adding 1e-3 to one coordinate is visible in the cross ratios.
        let d = euclid_plane();
        let bad = MoebiusMapHandle::new("perturbed shift", |p| match p.coords() {
            Some(c) => {
                let mut c = c.to_vec();
                if c[0] > 0.5 {
                    c[0] += 1e-3;
                }
                ExtendedPoint::Finite { coords: c }
            }
            None => ExtendedPoint::Infinity,
        });
        let quads = vec![Quadruple::new(
            pt(&[0.0, 0.0]),
            pt(&[1.0, 0.0]),
            pt(&[0.0, 1.0]),
            pt(&[1.0, 1.0]),
        )];
        let res = moebius_residual(&d, &bad, &quads).unwrap();
        assert!(res > 1e-4, "residual {res}");
    }

    #[test]
    fn circle_residual_on_unit_circle() {
        // Eight equally spaced points on the Euclidean unit circle satisfy
        // the circle equality to machine precision.
        let d = euclid_plane();
        let pts: Vec<ExtendedPoint> = (0..8)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 8.0;
                pt(&[t.cos(), t.sin()])
            })
            .collect();
        let res = circle_residual(&d, &pts).unwrap();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn circle_residual_line_with_infinity() {
        let d = euclid_line();
        let pts = vec![
            pt(&[0.0]),
            pt(&[1.0]),
            pt(&[2.5]),
            pt(&[7.0]),
            ExtendedPoint::Infinity,
        ];
        let res = circle_residual(&d, &pts).unwrap();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn circle_residual_detects_non_concyclic() {
        let d = euclid_plane();
        let pts = vec![
            pt(&[0.0, 0.0]),
            pt(&[1.0, 0.0]),
            pt(&[1.3, 1.7]),
            pt(&[0.0, 1.0]),
        ];
        let res = circle_residual(&d, &pts).unwrap();
        assert!(res > 1e-3, "residual {res}");
    }

    #[test]
    fn too_few_points() {
        let d = euclid_plane();
        assert!(matches!(
            circle_residual(&d, &[pt(&[0.0, 0.0]), pt(&[1.0, 0.0])]),
            Err(Error::TooFewPoints(2))
        ));
    }

    #[test]
    fn crt_entry_transpositions() {
        // Swapping the first two entries, or the last two, exchanges the
        // second and third simplex coordinates; swapping both pairs at once
        // restores the original triple.
        let d = euclid_plane();
        let (x, y, z, u) = (
            pt(&[0.1, 0.0]),
            pt(&[1.0, 0.3]),
            pt(&[0.2, 1.4]),
            pt(&[-1.0, 0.8]),
        );
        let t = cross_ratio(&d, &Quadruple::new(x.clone(), y.clone(), z.clone(), u.clone()))
            .unwrap();
        let t_xy = cross_ratio(&d, &Quadruple::new(y.clone(), x.clone(), z.clone(), u.clone()))
            .unwrap();
        let t_zu = cross_ratio(&d, &Quadruple::new(x.clone(), y.clone(), u.clone(), z.clone()))
            .unwrap();
        let t_both = cross_ratio(&d, &Quadruple::new(y, x, u, z)).unwrap();
        assert!((t.a - t_xy.a).abs() < 1e-15);
        assert!((t.b - t_xy.c).abs() < 1e-15);
        assert!((t.c - t_xy.b).abs() < 1e-15);
        assert_eq!(t_xy.entries(), t_zu.entries());
        assert!(t.simplex_distance(&t_both) < 1e-15);
    }

    #[test]
    fn l1_unit_square_violates_ptolemy() {
        let d = MetricEvaluator::from_finite("manhattan", |a, b| {
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
        });
        let q = Quadruple::new(
            pt(&[0.0, 0.0]),
            pt(&[1.0, 0.0]),
            pt(&[1.0, 1.0]),
            pt(&[0.0, 1.0]),
        );
        let t = cross_ratio(&d, &q).unwrap();
        assert_eq!(classify_triple(&t, 1e-12).tag, PtolemyTag::Violation);
    }
}
