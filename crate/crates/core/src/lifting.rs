//! Horizontal lifts of base polygons, the area law of the vertical
//! holonomy, the holonomy functional on orthogonal pairs, recovery of the
//! complex structure of the base, and the quartic distance law.
//!
//! Lifting a closed base polygon edge by edge along horizontal lines ends
//! in the start fiber, displaced vertically; the squared displacement is
//! proportional to the enclosed area when the polygon lies in a complex
//! line of the base, with lifting constant 2, and vanishes on totally real
//! planes. The signed squared displacement of the rectangle spanned by a
//! unit vector u and v in its orthogonal complement is a linear functional
//! of v whose maximizer on the unit sphere recovers multiplication by i.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FiberedGeometry;
use crate::point::ExtendedPoint;
use crate::vecn;

/// A closed oriented base polygon with a distinguished (pointed) vertex.
/// The closing edge from the last vertex back to the first is implicit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasePolygon {
    pub vertices: Vec<Vec<f64>>,
    /// +1 traverses the vertices as listed, -1 in reverse.
    pub orientation: i8,
    pub pointed: usize,
}

impl BasePolygon {
    pub fn new(vertices: Vec<Vec<f64>>, orientation: i8, pointed: usize) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidArgument(
                "a polygon needs at least three vertices".into(),
            ));
        }
        if pointed >= vertices.len() {
            return Err(Error::InvalidArgument("pointed vertex out of range".into()));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::InvalidArgument("orientation must be +1 or -1".into()));
        }
        Ok(BasePolygon {
            vertices,
            orientation,
            pointed,
        })
    }

    /// The oriented rectangle with corners at `origin`, `origin + u`,
    /// `origin + u + v`, `origin + v`, pointed at `origin`.
    pub fn rectangle(origin: &[f64], u: &[f64], v: &[f64]) -> Self {
        let a = origin.to_vec();
        let b = vecn::add(origin, u);
        let c = vecn::add(&b, v);
        let d = vecn::add(origin, v);
        BasePolygon {
            vertices: vec![a, b, c, d],
            orientation: 1,
            pointed: 0,
        }
    }

    /// Vertex cycle starting at the pointed vertex, following the
    /// orientation, ending back at the pointed vertex.
    pub fn cycle_from_pointed(&self) -> Vec<&[f64]> {
        let n = self.vertices.len();
        let mut cycle: Vec<&[f64]> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let idx = if self.orientation >= 0 {
                (self.pointed + i) % n
            } else {
                (self.pointed + n - (i % n)) % n
            };
            cycle.push(&self.vertices[idx]);
        }
        cycle
    }
}

/// Outcome of lifting a closed polygon: the endpoint in the start fiber,
/// the fiber displacement, and the vertical order of the endpoint
/// relative to the start.
#[derive(Clone, Debug)]
pub struct LiftResult {
    pub end: ExtendedPoint,
    pub displacement: f64,
    /// +1 if the endpoint sits above the start, -1 below, 0 if equal.
    pub sign: i8,
}

/// Lift the polygon edge by edge starting at `start`, which must project
/// to the pointed vertex. Each edge is lifted along the unique horizontal
/// line over it; the endpoint lies in the start fiber, and its distance to
/// the start is the holonomy displacement of the polygon.
pub fn lift_polygon(
    model: &impl FiberedGeometry,
    poly: &BasePolygon,
    start: &ExtendedPoint,
) -> Result<LiftResult> {
    let base = model.project(start)?;
    let cycle = poly.cycle_from_pointed();
    if vecn::dist(&base, cycle[0]) > 1e-9 {
        return Err(Error::EdgeLiftFailed(
            "start does not project to the pointed vertex".into(),
        ));
    }
    let mut cur = start.clone();
    for target in cycle.iter().skip(1) {
        cur = model.mu_to(&cur, target)?;
    }
    let end_base = model.project(&cur)?;
    if vecn::dist(&end_base, &base) > 1e-9 {
        return Err(Error::EdgeLiftFailed(
            "lift did not return to the start fiber".into(),
        ));
    }
    let displacement = model.fiber_dist(start, &cur)?;
    let sign = match model.order_cmp(start, &cur)? {
        std::cmp::Ordering::Less => 1,
        std::cmp::Ordering::Greater => -1,
        std::cmp::Ordering::Equal => 0,
    };
    Ok(LiftResult {
        end: cur,
        displacement,
        sign,
    })
}

/// Least-squares fit of the area law displacement^2 = c^2 area over the
/// rectangles a u x b v in the plane spanned by the orthonormal pair u, v.
#[derive(Clone, Debug, Serialize)]
pub struct AreaLawFit {
    pub c: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    /// Whether displacement^2 depends linearly on the area within 1e-6 of
    /// a perfect coefficient of determination.
    pub linear: bool,
}

pub fn area_law_fit(
    model: &impl FiberedGeometry,
    u: &[f64],
    v: &[f64],
    rectangles: &[(f64, f64)],
    start: &ExtendedPoint,
) -> Result<AreaLawFit> {
    if rectangles.is_empty() {
        return Err(Error::InvalidArgument("no rectangles supplied".into()));
    }
    let origin = model.project(start)?;
    let mut areas = Vec::with_capacity(rectangles.len());
    let mut disps = Vec::with_capacity(rectangles.len());
    for &(a, b) in rectangles {
        let poly = BasePolygon::rectangle(&origin, &vecn::scale(u, a), &vecn::scale(v, b));
        let lift = lift_polygon(model, &poly, start)?;
        areas.push(a * b);
        disps.push(lift.displacement * lift.displacement);
    }
    // Least squares through the origin: disp^2 = c^2 area.
    let sxx: f64 = areas.iter().map(|a| a * a).sum();
    let sxy: f64 = areas.iter().zip(&disps).map(|(a, d)| a * d).sum();
    let c2 = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let residuals: Vec<f64> = areas
        .iter()
        .zip(&disps)
        .map(|(a, d)| d - c2 * a)
        .collect();
    let mean = disps.iter().sum::<f64>() / disps.len() as f64;
    let ss_tot: f64 = disps.iter().map(|d| (d - mean) * (d - mean)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res < 1e-24 {
        1.0
    } else {
        0.0
    };
    Ok(AreaLawFit {
        c: c2.sqrt(),
        r_squared,
        residuals,
        linear: r_squared >= 1.0 - 1e-6,
    })
}

/// The signed squared holonomy displacement of the rectangle u x v, with
/// the sign given by the vertical order of the lifted endpoint. Linear in
/// v over the orthogonal complement of u.
pub fn xi(
    model: &impl FiberedGeometry,
    u: &[f64],
    v: &[f64],
    start: &ExtendedPoint,
) -> Result<f64> {
    let ip = vecn::dot(u, v);
    if ip.abs() > 1e-12 * vecn::norm(u).max(1.0) * vecn::norm(v).max(1.0) {
        return Err(Error::NotOrthogonal(ip));
    }
    if vecn::norm(v) == 0.0 {
        return Ok(0.0);
    }
    let origin = model.project(start)?;
    let poly = BasePolygon::rectangle(&origin, u, v);
    let lift = lift_polygon(model, &poly, start)?;
    Ok(lift.sign as f64 * lift.displacement * lift.displacement)
}

/// Search parameters for the holonomy maximizer.
#[derive(Clone, Copy, Debug)]
pub struct JSearch {
    /// Grid resolution in degrees for the coarse pass.
    pub grid_deg: f64,
    /// Great-circle refinement sweeps.
    pub refine_rounds: usize,
    /// Minimum gap between the best and runner-up grid clusters.
    pub isolation: f64,
}

impl Default for JSearch {
    fn default() -> Self {
        JSearch {
            grid_deg: 2.0,
            refine_rounds: 16,
            isolation: 1e-3,
        }
    }
}

fn orthonormal_complement(u: &[f64]) -> Vec<Vec<f64>> {
    let dim = u.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        // Remove the u component and the previously accepted ones.
        let mut w = vecn::axpy(&e, -vecn::dot(&e, u), u);
        for b in &basis {
            w = vecn::axpy(&w, -vecn::dot(&w, b), b);
        }
        if vecn::norm(&w) > 1e-8 {
            basis.push(vecn::normalize(&w).unwrap());
        }
        if basis.len() == dim - 1 {
            break;
        }
    }
    basis
}

/// Recover the image of `u` under the complex structure of the base as
/// the maximizer of the holonomy functional over the unit sphere of the
/// orthogonal complement of `u`: coarse grid over the coordinate great
/// circles, then golden-section sweeps along great circles through the
/// current best and each complement axis.
pub fn recover_j(
    model: &impl FiberedGeometry,
    u: &[f64],
    search: &JSearch,
    start: &ExtendedPoint,
) -> Result<Vec<f64>> {
    let n = vecn::norm(u);
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitDirection(n));
    }
    let basis = orthonormal_complement(u);
    let q = basis.len();
    if q == 0 {
        return Err(Error::InvalidArgument(
            "the orthogonal complement is trivial".into(),
        ));
    }
    // Candidate vectors carry floating-point dust along u from the basis
    // construction and the sphere walks; project it out before the strict
    // orthogonality gate of `xi`.
    let u_owned = u.to_vec();
    let eval = move |v: &[f64]| -> Result<f64> {
        let v_perp = vecn::axpy(v, -vecn::dot(v, &u_owned), &u_owned);
        xi(model, &u_owned, &v_perp, start)
    };
    let embed = |coeffs: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; u.len()];
        for (c, b) in coeffs.iter().zip(&basis) {
            v = vecn::axpy(&v, *c, b);
        }
        v
    };

    if q == 1 {
        let plus = eval(&embed(&[1.0]))?;
        let minus = eval(&embed(&[-1.0]))?;
        let gap = (plus - minus).abs();
        if gap < search.isolation {
            return Err(Error::MaximizerNotIsolated(gap));
        }
        let v = embed(&[if plus >= minus { 1.0 } else { -1.0 }]);
        return Ok(perp_unit(&v, u));
    }

    // Coarse pass: 2-dimensional coordinate circles of the complement.
    let step = search.grid_deg.to_radians();
    let n_steps = (2.0 * std::f64::consts::PI / step).ceil() as usize;
    let mut best_val = f64::NEG_INFINITY;
    let mut best: Vec<f64> = vec![0.0; q];
    let mut runner_up = f64::NEG_INFINITY;
    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..q {
        for j in (i + 1)..q {
            for s in 0..n_steps {
                let a = s as f64 * step;
                let mut coeffs = vec![0.0; q];
                coeffs[i] = a.cos();
                coeffs[j] = a.sin();
                let val = eval(&embed(&coeffs))?;
                candidates.push((coeffs.clone(), val));
                if val > best_val {
                    best_val = val;
                    best = coeffs;
                }
            }
        }
    }
    for (coeffs, val) in &candidates {
        let ang = vecn::angle(coeffs, &best);
        if ang > 0.35 && *val > runner_up {
            runner_up = *val;
        }
    }
    if runner_up.is_finite() && (best_val - runner_up) < search.isolation {
        return Err(Error::MaximizerNotIsolated(best_val - runner_up));
    }

    // Refinement: golden-section maximization along great circles through
    // the current best and each complement axis.
    let golden = |f: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64| -> Result<f64> {
        let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut c = hi - phi * (hi - lo);
        let mut d = lo + phi * (hi - lo);
        let mut fc = f(c)?;
        let mut fd = f(d)?;
        for _ in 0..60 {
            if fc > fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - phi * (hi - lo);
                fc = f(c)?;
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + phi * (hi - lo);
                fd = f(d)?;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    for _ in 0..search.refine_rounds {
        for axis in 0..q {
            let mut e = vec![0.0; q];
            e[axis] = 1.0;
            // Component of the axis orthogonal to the current best.
            let along = vecn::dot(&e, &best);
            let mut w = vecn::axpy(&e, -along, &best);
            let wn = vecn::norm(&w);
            if wn < 1e-12 {
                continue;
            }
            w = vecn::scale(&w, 1.0 / wn);
            let b = best.clone();
            let w2 = w.clone();
            let f = move |a: f64| -> Vec<f64> {
                let mut out = vecn::scale(&b, a.cos());
                out = vecn::axpy(&out, a.sin(), &w2);
                out
            };
            let obj = |a: f64| -> Result<f64> { eval(&embed(&f(a))) };
            let a_star = golden(&obj, -0.1, 0.1)?;
            best = f(a_star);
            let bn = vecn::norm(&best);
            best = vecn::scale(&best, 1.0 / bn);
        }
    }
    Ok(perp_unit(&embed(&best), u))
}

fn perp_unit(v: &[f64], u: &[f64]) -> Vec<f64> {
    let w = vecn::axpy(v, -vecn::dot(v, u), u);
    vecn::normalize(&w).unwrap_or_else(|| w)
}

/// Base and fiber components of the distance between two finite points:
/// the base distance of the projections, and the fiber distance from the
/// horizontal projection of x into the fiber of y.
pub fn dist_components(
    model: &impl FiberedGeometry,
    x: &ExtendedPoint,
    y: &ExtendedPoint,
) -> Result<(f64, f64)> {
    let bx = model.project(x)?;
    let by = model.project(y)?;
    let a = vecn::dist(&bx, &by);
    let mu_x = model.mu_to(x, &by)?;
    let b = model.fiber_dist(&mu_x, y)?;
    Ok((a, b))
}

/// Max relative deviation from the quartic law
/// dist(x, y)^4 = a^4 + b^4 over the sampled pairs.
pub fn d_law_residual(
    model: &impl FiberedGeometry,
    pairs: &[(ExtendedPoint, ExtendedPoint)],
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (x, y) in pairs {
        let (a, b) = dist_components(model, x, y)?;
        let d = model.dist(x, y);
        if d == 0.0 {
            continue;
        }
        let lhs = d.powi(4);
        let rhs = a.powi(4) + b.powi(4);
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LineGeometry;
    use crate::heisenberg::{HeisElement, HeisModel};
    use crate::rng;
    use num_complex::Complex64;
    use rand::Rng;

    fn origin_point(m: &HeisModel) -> ExtendedPoint {
        m.origin().to_point()
    }

    #[test]
    fn degenerate_polygon_has_zero_displacement() {
        let m = HeisModel::new(2).unwrap();
        let poly = BasePolygon::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.0]],
            1,
            0,
        )
        .unwrap();
        let lift = lift_polygon(&m, &poly, &origin_point(&m)).unwrap();
        assert!(lift.displacement < 1e-12);
    }

    #[test]
    fn unit_square_displacement_is_two() {
        let m = HeisModel::new(2).unwrap();
        let poly = BasePolygon::rectangle(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]);
        let lift = lift_polygon(&m, &poly, &origin_point(&m)).unwrap();
        assert!(
            (lift.displacement - 2.0).abs() < 1e-12,
            "{}",
            lift.displacement
        );
    }

    #[test]
    fn split_polygon_composes() {
        // Lifting a rectangle equals lifting its two halves in sequence.
        let m = HeisModel::new(2).unwrap();
        let whole = BasePolygon::rectangle(&[0.0, 0.0], &[2.0, 0.0], &[0.0, 1.0]);
        let left = BasePolygon::rectangle(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]);
        let right = BasePolygon::rectangle(&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]);
        let start = origin_point(&m);
        let start_right = m.mu_to(&start, &[1.0, 0.0]).unwrap();
        let full = lift_polygon(&m, &whole, &start).unwrap();
        // tau_right(tau_left(start)): transport the start into the right
        // rectangle's pointed fiber, lift there, come back.
        let a = lift_polygon(&m, &left, &start).unwrap();
        let b = lift_polygon(&m, &right, &start_right).unwrap();
        // Vertical displacements add with sign.
        let total = a.sign as f64 * a.displacement.powi(2) + b.sign as f64 * b.displacement.powi(2);
        let full_signed = full.sign as f64 * full.displacement.powi(2);
        assert!((total - full_signed).abs() < 1e-10, "{total} vs {full_signed}");
    }

    #[test]
    fn area_law_complex_line() {
        let m = HeisModel::new(2).unwrap();
        let rects: Vec<(f64, f64)> = (1..=20)
            .map(|i| (0.1 * i as f64, 0.35 + 0.05 * i as f64))
            .collect();
        let fit = area_law_fit(&m, &[1.0, 0.0], &[0.0, 1.0], &rects, &origin_point(&m)).unwrap();
        assert!((fit.c - 2.0).abs() < 1e-9, "c = {}", fit.c);
        assert!(fit.linear);
    }

    #[test]
    fn area_law_totally_real_plane_vanishes() {
        let m = HeisModel::new(3).unwrap();
        // Directions e1 and e2 of C^2, both real: u = (1, 0, 0, 0),
        // v = (0, 0, 1, 0) in flat coordinates.
        let rects: Vec<(f64, f64)> = (1..=20).map(|i| (0.2 * i as f64, 0.7)).collect();
        let fit = area_law_fit(
            &m,
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &rects,
            &m.origin().to_point(),
        )
        .unwrap();
        assert!(fit.c < 1e-9, "c = {}", fit.c);
    }

    #[test]
    fn xi_examples() {
        let m = HeisModel::new(2).unwrap();
        let o = origin_point(&m);
        // v = i u has the full holonomy +4 with the ascending order.
        let v = xi(&m, &[1.0, 0.0], &[0.0, 1.0], &o).unwrap();
        assert!((v - 4.0).abs() < 1e-12, "{v}");
        // Homogeneity with negative coefficients.
        let w = xi(&m, &[1.0, 0.0], &[0.0, -2.0], &o).unwrap();
        assert!((w + 8.0).abs() < 1e-9, "{w}");
        // Zero vector gives zero.
        assert_eq!(xi(&m, &[1.0, 0.0], &[0.0, 0.0], &o).unwrap(), 0.0);
        // Non-orthogonal input is rejected.
        assert!(matches!(
            xi(&m, &[1.0, 0.0], &[0.5, 0.5], &o),
            Err(Error::NotOrthogonal(_))
        ));
    }

    #[test]
    fn recover_j_is_multiplication_by_i() {
        let m = HeisModel::new(3).unwrap();
        let o = m.origin().to_point();
        let search = JSearch {
            grid_deg: 6.0,
            ..JSearch::default()
        };
        // u = e1: J(u) must be i e1 = (0, 1, 0, 0).
        let j = recover_j(&m, &[1.0, 0.0, 0.0, 0.0], &search, &o).unwrap();
        let target = [0.0, 1.0, 0.0, 0.0];
        assert!(
            vecn::angle(&j, &target) < 1e-4,
            "angle {}",
            vecn::angle(&j, &target)
        );
        // J(J(u)) = -u.
        let jj = recover_j(&m, &j, &search, &o).unwrap();
        let minus_u = [-1.0, 0.0, 0.0, 0.0];
        assert!(vecn::angle(&jj, &minus_u) < 1e-4);
        // |xi_u(J u)| = 4.
        let val = xi(&m, &[1.0, 0.0, 0.0, 0.0], &j, &o).unwrap();
        assert!((val - 4.0).abs() < 1e-6, "{val}");
    }

    #[test]
    fn dist_components_and_quartic_law() {
        let m = HeisModel::new(2).unwrap();
        let mut rng = rng::stream(21, "d-law");
        let mut pairs = Vec::new();
        for _ in 0..2000 {
            let x = m.random_point(&mut rng, 2.0);
            let y = m.random_point(&mut rng, 2.0);
            pairs.push((x, y));
        }
        let res = d_law_residual(&m, &pairs).unwrap();
        assert!(res < 1e-9, "residual {res}");
        // Fiber pair: a = 0, b = dist.
        let x = HeisElement::new(vec![Complex64::new(0.3, 0.4)], 0.2)
            .unwrap()
            .to_point();
        let y = HeisElement::new(vec![Complex64::new(0.3, 0.4)], -0.5)
            .unwrap()
            .to_point();
        let (a, b) = dist_components(&m, &x, &y).unwrap();
        assert!(a == 0.0 && (b - m.dist(&x, &y)).abs() < 1e-15);
        // Common horizontal line: b = 0.
        let line = m.line_through(&x, &[0.6, 0.8]).unwrap();
        let (a, b) = dist_components(&m, &line.at(-0.3), &line.at(1.1)).unwrap();
        assert!((a - 1.4).abs() < 1e-12 && b < 1e-12);
    }
}
