//! Tangent lines, diagnostics of bounded circles against a vertical
//! fiber, and the quadratic excess bound for a circle meeting a line
//! twice.
//!
//! The diagnostics quantify, for a closed curve meeting a fiber F in two
//! points x and y: the mean-geometric law |x z| |z y| = |z w|^2 relating a
//! point w of the curve to its horizontal projection z into F, constancy
//! of the distance to the fiber midpoint, equality of the distances from
//! the two sheets, monotonicity of the projected height along each sheet,
//! the Pythagorean law |x y|^2 = |x z|^2 + |z y|^2 inside the fiber, and
//! the quadratic smallness of arc length over chord length.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::busemann::{busemann, neville_to_zero, slope_estimate, BusemannScheme};
use crate::error::{Error, Result};
use crate::geometry::{FiberedGeometry, LineGeometry, ModelLine};
use crate::metric::circle_residual;
use crate::point::ExtendedPoint;
use crate::vecn;

/// A parameterized curve; closed curves carry their period.
#[derive(Clone)]
pub struct Curve {
    eval: Arc<dyn Fn(f64) -> ExtendedPoint + Send + Sync>,
    pub period: Option<f64>,
}

impl Curve {
    pub fn new<F>(eval: F, period: Option<f64>) -> Self
    where
        F: Fn(f64) -> ExtendedPoint + Send + Sync + 'static,
    {
        Curve {
            eval: Arc::new(eval),
            period,
        }
    }

    pub fn from_r_circle(circle: &crate::heisenberg::RCircle) -> Self {
        let c = circle.clone();
        Curve::new(move |u| c.point_at(u), Some(2.0 * std::f64::consts::PI))
    }

    pub fn at(&self, u: f64) -> ExtendedPoint {
        (self.eval)(u)
    }

    pub fn sample(&self, n: usize) -> Vec<ExtendedPoint> {
        let span = self.period.unwrap_or(1.0);
        (0..n).map(|i| self.at(span * i as f64 / n as f64)).collect()
    }
}

/// Distance from a point to a line, by golden-section minimization of the
/// convex function t -> d(p, line(t)).
pub fn dist_to_line(model: &impl LineGeometry, line: &ModelLine, p: &ExtendedPoint) -> f64 {
    let reach = model.dist(p, line.base()) + 1.0;
    let (mut lo, mut hi) = (-2.0 * reach, 2.0 * reach);
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let f = |t: f64| model.dist(p, &line.at(t));
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    f(0.5 * (lo + hi))
}

/// The tangent line to a curve at parameter `s0`: the direction comes from
/// symmetric secants, step-halved until the direction stabilizes below
/// `tol` in angle.
pub fn tangent_line(
    model: &impl LineGeometry,
    curve: &Curve,
    s0: f64,
    tol: f64,
) -> Result<ModelLine> {
    let p = curve.at(s0);
    let mut eps = 1e-2;
    let mut prev: Option<Vec<f64>> = None;
    for _ in 0..40 {
        let dir = model.chord_direction(&curve.at(s0 - eps), &curve.at(s0 + eps))?;
        if let Some(ref last) = prev {
            if vecn::angle(last, &dir) <= tol {
                return model.line_through(&p, &dir);
            }
        }
        prev = Some(dir);
        eps *= 0.5;
        if eps < 1e-9 {
            break;
        }
    }
    Err(Error::NonConvergent {
        estimate: 0.0,
        err_est: prev.map(|_| eps).unwrap_or(f64::NAN),
        tol,
    })
}

/// Signed squared fiber gap between two points of a common fiber:
/// positive when `b` sits above `a` in the vertical order. Smooth where
/// the unsigned fiber distance is not.
pub fn signed_fiber_gap_sq(
    model: &impl FiberedGeometry,
    a: &ExtendedPoint,
    b: &ExtendedPoint,
) -> Result<f64> {
    let d = model.fiber_dist(a, b)?;
    let sign = match model.order_cmp(a, b)? {
        std::cmp::Ordering::Less => 1.0,
        std::cmp::Ordering::Greater => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    };
    Ok(sign * d * d)
}

/// Signed height of the horizontal projection of `w` into the fiber of
/// `anchor`, relative to the anchor.
fn projected_height(
    model: &impl FiberedGeometry,
    anchor: &ExtendedPoint,
    anchor_base: &[f64],
    w: &ExtendedPoint,
) -> Result<f64> {
    let z = model.mu_to(w, anchor_base)?;
    signed_fiber_gap_sq(model, anchor, &z)
}

/// Where a closed curve crosses the fiber over `fiber_base`: parameters of
/// the crossing points, found by scanning the base distance for minima
/// and refining them by golden section.
pub fn fiber_crossings(
    model: &impl FiberedGeometry,
    curve: &Curve,
    fiber_base: &[f64],
    n_scan: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let period = curve
        .period
        .ok_or_else(|| Error::InvalidArgument("crossings need a closed curve".into()))?;
    let gap = |u: f64| -> Result<f64> {
        Ok(vecn::dist(&model.project(&curve.at(u))?, fiber_base))
    };
    let vals: Vec<f64> = (0..n_scan)
        .map(|i| gap(period * i as f64 / n_scan as f64))
        .collect::<Result<_>>()?;
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut crossings = Vec::new();
    for i in 0..n_scan {
        let prev = vals[(i + n_scan - 1) % n_scan];
        let next = vals[(i + 1) % n_scan];
        if vals[i] <= prev && vals[i] <= next {
            // Local minimum: refine over the bracketing interval.
            let mut lo = period * (i as f64 - 1.0) / n_scan as f64;
            let mut hi = period * (i as f64 + 1.0) / n_scan as f64;
            let mut c = hi - phi * (hi - lo);
            let mut d = lo + phi * (hi - lo);
            let (mut fc, mut fd) = (gap(c)?, gap(d)?);
            for _ in 0..200 {
                if fc < fd {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - phi * (hi - lo);
                    fc = gap(c)?;
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + phi * (hi - lo);
                    fd = gap(d)?;
                }
            }
            let u = 0.5 * (lo + hi);
            if gap(u)? < tol {
                let u = u.rem_euclid(period);
                if crossings
                    .iter()
                    .all(|&v: &f64| {
                        let diff = (v - u).abs();
                        diff.min(period - diff) > 1e-6 * period
                    })
                {
                    crossings.push(u);
                }
            }
        }
    }
    crossings.sort_by(f64::total_cmp);
    Ok(crossings)
}

/// Diagnostics of a closed curve against the fiber it crosses twice.
#[derive(Clone, Debug, Serialize)]
pub struct CircleDiagnostics {
    pub crossings: usize,
    /// Max relative defect of |x z| |z y| = |z w|^2.
    pub mean_geometric: f64,
    /// Max relative deviation of |z_mid w| from its mean.
    pub radius_constancy: f64,
    pub radius: f64,
    /// Max relative defect of |z w| = |z w'| for sheet-symmetric pairs.
    pub symmetric_distance: f64,
    /// Projected height strictly monotone along each sheet.
    pub two_sheet_monotone: bool,
    /// Max relative defect of |x y|^2 = |x z|^2 + |z y|^2 in the fiber.
    pub fiber_pythagoras: f64,
    /// Cross-ratio boundary residual of cyclic samples.
    pub ptolemy_residual: f64,
    /// Fitted exponent p of (arc - chord) ~ chord^p; quadratic smallness
    /// of the excess means p above 2.
    pub rect_exponent: f64,
    /// (arc - chord) / chord^2 at the smallest window measured.
    pub rect_defect_ratio: f64,
}

impl CircleDiagnostics {
    /// JSON object keyed by the identity each number certifies.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = BTreeMap::new();
        map.insert("crossings", serde_json::json!(self.crossings));
        map.insert("lem:mean_geometric", serde_json::json!(self.mean_geometric));
        map.insert("prop:unit_rcircle", serde_json::json!(self.radius_constancy));
        map.insert("radius", serde_json::json!(self.radius));
        map.insert(
            "lem:equal_distances",
            serde_json::json!(self.symmetric_distance),
        );
        map.insert(
            "cor:circle_cover_twice",
            serde_json::json!(self.two_sheet_monotone),
        );
        map.insert(
            "prop:euclid_square_fiber",
            serde_json::json!(self.fiber_pythagoras),
        );
        map.insert("eq:PT_eq", serde_json::json!(self.ptolemy_residual));
        map.insert(
            "lem:circle_rectifiable",
            serde_json::json!({
                "exponent": self.rect_exponent,
                "defect_over_chord_sq": self.rect_defect_ratio,
            }),
        );
        serde_json::to_value(map).expect("static keys")
    }
}

fn chord_sum(model: &impl LineGeometry, curve: &Curve, a: f64, b: f64, n: usize) -> f64 {
    let mut total = 0.0;
    let mut prev = curve.at(a);
    for i in 1..=n {
        let u = a + (b - a) * i as f64 / n as f64;
        let next = curve.at(u);
        total += model.dist(&prev, &next);
        prev = next;
    }
    total
}

pub fn circle_diagnostics(
    model: &impl FiberedGeometry,
    curve: &Curve,
    fiber_base: &[f64],
    n_samples: usize,
) -> Result<CircleDiagnostics> {
    let period = curve
        .period
        .ok_or_else(|| Error::InvalidArgument("diagnostics need a closed curve".into()))?;
    let crossings = fiber_crossings(model, curve, fiber_base, 512, 1e-7)?;
    if crossings.len() != 2 {
        return Err(Error::CircleDoesNotMeetFiberTwice(crossings.len()));
    }
    let (u_x, u_y) = (crossings[0], crossings[1]);
    let x = model.mu_to(&curve.at(u_x), fiber_base)?;
    let y = model.mu_to(&curve.at(u_y), fiber_base)?;
    let dxy = model.dist(&x, &y);
    if dxy < 1e-9 {
        return Err(Error::CircleDoesNotMeetFiberTwice(1));
    }
    let s_y = signed_fiber_gap_sq(model, &x, &y)?;

    // The two sheets between the crossings.
    let sheets = [(u_x, u_y), (u_y, u_x + period)];
    let mut mean_geometric = 0.0_f64;
    let mut fiber_pythagoras = 0.0_f64;
    let mut two_sheet_monotone = true;
    let mut radii: Vec<f64> = Vec::new();
    // Fiber midpoint: equal distance to x and y.
    let z_mid = model.fiber_offset(&x, s_y / 2.0)?;

    let per_sheet = (n_samples / 2).max(8);
    let mut sheet_heights: Vec<Vec<(f64, f64)>> = Vec::new(); // (height, u)
    for (sheet_idx, &(a, b)) in sheets.iter().enumerate() {
        let mut heights = Vec::with_capacity(per_sheet);
        let mut last_height = None;
        // The first sheet runs from x (height 0) to y (height s_y), the
        // second from y back to x; the projected height is monotone along
        // each, in opposite senses.
        let increasing = if sheet_idx == 0 { s_y > 0.0 } else { s_y < 0.0 };
        for i in 1..per_sheet {
            let u = a + (b - a) * i as f64 / per_sheet as f64;
            let w = curve.at(u);
            let s_w = projected_height(model, &x, fiber_base, &w)?;
            if let Some(prev) = last_height {
                let ordered = if increasing { s_w > prev } else { s_w < prev };
                if !ordered {
                    two_sheet_monotone = false;
                }
            }
            last_height = Some(s_w);
            heights.push((s_w, u));
            // Skip projections outside the open fiber segment.
            let inside = if s_y > 0.0 {
                s_w > 1e-9 && s_w < s_y - 1e-9
            } else {
                s_w < -1e-9 && s_w > s_y + 1e-9
            };
            if inside {
                let z = model.mu_to(&w, fiber_base)?;
                let dx = model.dist(&x, &z);
                let dy = model.dist(&z, &y);
                let dw = model.dist(&z, &w);
                if dw > 1e-12 {
                    mean_geometric =
                        mean_geometric.max((dx * dy - dw * dw).abs() / (dw * dw));
                }
                fiber_pythagoras = fiber_pythagoras
                    .max((dxy * dxy - dx * dx - dy * dy).abs() / (dxy * dxy));
            }
            radii.push(model.dist(&z_mid, &w));
        }
        sheet_heights.push(heights);
    }

    let radius = radii.iter().sum::<f64>() / radii.len() as f64;
    let radius_constancy = radii
        .iter()
        .map(|r| (r - radius).abs() / radius)
        .fold(0.0_f64, f64::max);

    // Sheet symmetry: match each first-sheet sample with the second-sheet
    // point at the same projected height (bisection; heights are monotone).
    let mut symmetric_distance = 0.0_f64;
    let second = &sheet_heights[1];
    for &(s_w, u) in sheet_heights[0].iter() {
        let target = s_w;
        let inside = if s_y > 0.0 {
            target > 1e-6 && target < s_y - 1e-6
        } else {
            target < -1e-6 && target > s_y + 1e-6
        };
        if !inside {
            continue;
        }
        // Bracket on the sampled second sheet.
        let mut bracket = None;
        for w in second.windows(2) {
            let (s0, u0) = w[0];
            let (s1, u1) = w[1];
            if (s0 - target) * (s1 - target) <= 0.0 {
                bracket = Some((u0, u1));
                break;
            }
        }
        let Some((mut lo, mut hi)) = bracket else {
            continue;
        };
        let h_at = |u: f64| -> Result<f64> {
            projected_height(model, &x, fiber_base, &curve.at(u))
        };
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if (h_at(lo)? - target) * (h_at(mid)? - target) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let u_pair = 0.5 * (lo + hi);
        let w = curve.at(u);
        let w_pair = curve.at(u_pair);
        let z = model.mu_to(&w, fiber_base)?;
        let d1 = model.dist(&z, &w);
        let d2 = model.dist(&z, &w_pair);
        if d1 > 1e-9 {
            symmetric_distance = symmetric_distance.max((d1 - d2).abs() / d1);
        }
    }

    // Rectifiability: the arc-over-chord excess at a generic point decays
    // faster than the square of the chord.
    let u0 = u_x + 0.37 * (u_y - u_x);
    let mut logs: Vec<(f64, f64)> = Vec::new();
    let mut rect_defect_ratio = 0.0_f64;
    let mut w = 0.2_f64;
    for _ in 0..6 {
        let chord = model.dist(&curve.at(u0 - w), &curve.at(u0 + w));
        let arc = chord_sum(model, curve, u0 - w, u0 + w, 4096);
        let defect = arc - chord;
        if defect > 1e-12 && chord > 0.0 {
            logs.push((chord.ln(), defect.ln()));
            rect_defect_ratio = defect / (chord * chord);
        }
        w *= 0.5;
    }
    let rect_exponent = if logs.len() >= 2 {
        let n = logs.len() as f64;
        let sx: f64 = logs.iter().map(|l| l.0).sum();
        let sy: f64 = logs.iter().map(|l| l.1).sum();
        let sxx: f64 = logs.iter().map(|l| l.0 * l.0).sum();
        let sxy: f64 = logs.iter().map(|l| l.0 * l.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    } else {
        f64::NAN
    };

    let ptolemy_residual = circle_residual(model.metric(), &curve.sample(16))?;

    Ok(CircleDiagnostics {
        crossings: crossings.len(),
        mean_geometric,
        radius_constancy,
        radius,
        symmetric_distance,
        two_sheet_monotone,
        fiber_pythagoras,
        ptolemy_residual,
        rect_exponent,
        rect_defect_ratio,
    })
}

/// A horizontal secant of a closed curve: a parameter pair whose points
/// lie on a common horizontal line. Found by scanning the signed fiber
/// gap of the second point against the horizontal plane of the first and
/// bisecting a sign change.
pub fn find_horizontal_secant(
    model: &impl FiberedGeometry,
    curve: &Curve,
    u1: f64,
    n_scan: usize,
) -> Result<(f64, f64)> {
    let period = curve
        .period
        .ok_or_else(|| Error::InvalidArgument("secant search needs a closed curve".into()))?;
    let p1 = curve.at(u1);
    let gap = |u2: f64| -> Result<f64> {
        let w = curve.at(u2);
        let base_w = model.project(&w)?;
        let mu = model.mu_to(&p1, &base_w)?;
        signed_fiber_gap_sq(model, &mu, &w)
    };
    let exclusion = 0.02 * period;
    let mut prev_u = None;
    let mut prev_v = None;
    for i in 0..=n_scan {
        let u2 = u1 + exclusion + (period - 2.0 * exclusion) * i as f64 / n_scan as f64;
        let v = gap(u2)?;
        if let (Some(pu), Some(pv)) = (prev_u, prev_v) {
            if v == 0.0 || pv * v < 0.0 {
                let (mut lo, mut hi) = (pu, u2);
                let mut flo = pv;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fmid = gap(mid)?;
                    if flo * fmid <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fmid;
                    }
                }
                return Ok((u1, (0.5 * (lo + hi)).rem_euclid(period)));
            }
        }
        prev_u = Some(u2);
        prev_v = Some(v);
    }
    Err(Error::ParameterizationFailed(
        "no horizontal secant found from the given parameter".into(),
    ))
}

/// Quadratic excess data for a circle meeting a horizontal line at the
/// parameters `u1`, `u2`.
#[derive(Clone, Debug, Serialize)]
pub struct ExcessReport {
    /// min over the sampled window of (2 alpha t - (1 - alpha^2) t^2 / a)
    /// minus (b+(x_t) + b-(y_t)); the bound holds when this is above the
    /// negative tolerance.
    pub margin: f64,
    /// Chord length |x y|.
    pub chord: f64,
    /// Slope of the tangent at x against the secant line.
    pub alpha_x: f64,
    /// Slope of the tangent at y against the secant line (sign adjusted
    /// to the common orientation); equals alpha_x in theory.
    pub alpha_y: f64,
    /// First-variation estimate of the same slope.
    pub alpha_fd: f64,
}

/// Walk the sheet from `u_from` towards `u_to` to the unique point at
/// distance `t` from the sheet start (distances along a sheet increase
/// monotonically until the far endpoint).
fn point_at_arc_dist(
    model: &impl LineGeometry,
    curve: &Curve,
    u_from: f64,
    u_to: f64,
    t: f64,
) -> Result<f64> {
    let p = curve.at(u_from);
    let f = |s: f64| -> f64 { model.dist(&p, &curve.at(u_from + s * (u_to - u_from))) - t };
    let (mut lo, mut hi) = (1e-12, 1.0);
    if f(hi) < 0.0 {
        return Err(Error::ParameterizationFailed(format!(
            "distance {t} not reached along the sheet"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(u_from + 0.5 * (lo + hi) * (u_to - u_from))
}

pub fn quadratic_excess_check(
    model: &impl FiberedGeometry,
    curve: &Curve,
    u1: f64,
    u2: f64,
    scheme: &BusemannScheme,
    n_t: usize,
) -> Result<ExcessReport> {
    let x = curve.at(u1);
    let y = curve.at(u2);
    let a = model.dist(&x, &y);
    if a < 1e-9 {
        return Err(Error::CoincidentPoints);
    }
    let dir_xy = model.chord_direction(&x, &y)?;
    let dir_yx: Vec<f64> = dir_xy.iter().map(|v| -v).collect();
    // Busemann functions of the secant line, normalized so that
    // b+(x) = 0, b+(y) = -a and b-(y) = 0, b-(x) = -a.
    let line_plus = model.line_through(&x, &dir_xy)?;
    let line_minus = model.line_through(&y, &dir_yx)?;
    // The reference orientation of the secant for the slopes, chosen so
    // that the slope of the tangent equals the first variation of the
    // chord distance along the sheet.
    let secant_oriented = model.line_through(&x, &dir_xy)?;

    // Tangent slopes at both intersection points, oriented into the sheet.
    let into_sheet_dir = |u_at: f64, towards: f64| -> Result<Vec<f64>> {
        let t = tangent_line(model, curve, u_at, 1e-7)?;
        let probe = curve.at(u_at + 1e-4 * (towards - u_at));
        let chord = model.chord_direction(&curve.at(u_at), &probe)?;
        Ok(if vecn::dot(t.dir(), &chord) >= 0.0 {
            t.dir().to_vec()
        } else {
            t.dir().iter().map(|v| -v).collect()
        })
    };
    let tangent_x = model.line_through(&x, &into_sheet_dir(u1, u2)?)?;
    let tangent_y = model.line_through(&y, &into_sheet_dir(u2, u1)?)?;
    let alpha_x = slope_estimate(model, &tangent_x, &secant_oriented, scheme, 1.0, 21, 1e-4)?
        .slope;
    // The into-sheet orientation at y runs against the sheet, flipping the
    // sign of its slope relative to the common orientation.
    let alpha_y = -slope_estimate(model, &tangent_y, &secant_oriented, scheme, 1.0, 21, 1e-4)?
        .slope;

    // First-variation route: alpha = d/dt |x_t y| at t = 0, extrapolated.
    let g = |t: f64| -> Result<f64> {
        let u = point_at_arc_dist(model, curve, u1, u2, t)?;
        Ok(model.dist(&curve.at(u), &y))
    };
    let mut us = Vec::new();
    let mut fs = Vec::new();
    for j in 0..3 {
        let t = 1e-3 / (1 << j) as f64;
        us.push(t);
        fs.push((g(t)? - a) / t);
    }
    let alpha_fd = neville_to_zero(&us, &fs, 2).value;

    let alpha = alpha_x;
    let mut margin = f64::INFINITY;
    for i in 1..=n_t {
        let t = 0.5 * a * i as f64 / n_t as f64;
        let ux_t = point_at_arc_dist(model, curve, u1, u2, t)?;
        let uy_t = point_at_arc_dist(model, curve, u2, u1, t)?;
        let b_plus = busemann(model, &line_plus, &curve.at(ux_t), scheme)?.value;
        let b_minus = busemann(model, &line_minus, &curve.at(uy_t), scheme)?.value;
        let lhs = b_plus + b_minus;
        let rhs = 2.0 * alpha * t - (1.0 - alpha * alpha) * t * t / a;
        margin = margin.min(rhs - lhs);
    }
    Ok(ExcessReport {
        margin,
        chord: a,
        alpha_x,
        alpha_y,
        alpha_fd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::{standard_unit_r_circle, HeisModel};

    #[test]
    fn tangent_of_a_line_is_the_line() {
        let m = HeisModel::new(2).unwrap();
        let base = m.origin().to_point();
        let l = m.line_through(&base, &[0.6, 0.8]).unwrap();
        let l2 = l.clone();
        let curve = Curve::new(move |t| l2.at(t), None);
        let tangent = tangent_line(&m, &curve, 0.7, 1e-9).unwrap();
        assert!(vecn::line_angle(tangent.dir(), &[0.6, 0.8]) < 1e-9);
        // Points of the curve stay on the tangent line.
        for s in [0.1, 0.5, 0.9] {
            // The quartic gauge turns coordinate rounding into a ~1e-8 floor
            // for near-zero distances.
            assert!(dist_to_line(&m, &tangent, &curve.at(s)) < 2e-8);
        }
    }

    #[test]
    fn unit_circle_diagnostics() {
        let m = HeisModel::new(2).unwrap();
        let circle = standard_unit_r_circle(&m).unwrap();
        let curve = Curve::from_r_circle(&circle);
        let diag = circle_diagnostics(&m, &curve, &[0.0, 0.0], 64).unwrap();
        assert_eq!(diag.crossings, 2);
        assert!(diag.mean_geometric < 1e-8, "{}", diag.mean_geometric);
        assert!(diag.radius_constancy < 1e-9, "{}", diag.radius_constancy);
        assert!((diag.radius - 1.0).abs() < 1e-9, "{}", diag.radius);
        assert!(diag.symmetric_distance < 1e-8, "{}", diag.symmetric_distance);
        assert!(diag.two_sheet_monotone);
        assert!(diag.fiber_pythagoras < 1e-10, "{}", diag.fiber_pythagoras);
        assert!(diag.ptolemy_residual < 1e-9, "{}", diag.ptolemy_residual);
        assert!(
            diag.rect_exponent > 2.2,
            "exponent {}",
            diag.rect_exponent
        );
    }

    #[test]
    fn fiber_pythagoras_on_plain_triple() {
        // Fiber points at heights 0, 1, 2: squared distances 4, 4, 8.
        let m = HeisModel::new(2).unwrap();
        let f = |h: f64| {
            crate::heisenberg::HeisElement::new(vec![num_complex::Complex64::ZERO], h)
                .unwrap()
                .to_point()
        };
        let (x, z, y) = (f(0.0), f(1.0), f(2.0));
        let dxz = m.dist(&x, &z).powi(2);
        let dzy = m.dist(&z, &y).powi(2);
        let dxy = m.dist(&x, &y).powi(2);
        assert!((dxy - dxz - dzy).abs() < 1e-12);
    }

    #[test]
    fn quadratic_excess_on_unit_circle() {
        let m = HeisModel::new(2).unwrap();
        let circle = standard_unit_r_circle(&m).unwrap();
        let curve = Curve::from_r_circle(&circle);
        let u1 = std::f64::consts::PI + 2.0 * (0.45_f64).atan();
        let (u1, u2) = find_horizontal_secant(&m, &curve, u1, 3000).unwrap();
        let scheme = BusemannScheme::default();
        let report = quadratic_excess_check(&m, &curve, u1, u2, &scheme, 12).unwrap();
        assert!(
            (report.alpha_x - report.alpha_y).abs() < 2e-3,
            "slope mismatch {} vs {}",
            report.alpha_x,
            report.alpha_y
        );
        assert!(
            (report.alpha_x - report.alpha_fd).abs() < 2e-3,
            "slope routes disagree: {} vs {}",
            report.alpha_x,
            report.alpha_fd
        );
        assert!(report.margin >= -1e-6, "margin {}", report.margin);
        // The two points really are horizontally incident.
        let x = curve.at(u1);
        let y = curve.at(u2);
        let (_, b) = crate::lifting::dist_components(&m, &x, &y).unwrap();
        assert!(b < 1e-7, "fiber component {b}");
    }
}
