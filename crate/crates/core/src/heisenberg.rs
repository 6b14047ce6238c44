//! The Heisenberg model: the group C^{k-1} x R with the Koranyi gauge.
//!
//! Elements are written (z, h) with z a complex vector and h a real
//! vertical coordinate. With the Hermitian form (z, z') = sum_i z_i
//! conj(z'_i), the group law is
//!
//! ```text
//! (z, h) (z', h') = (z + z', h + h' - Im(z, z') / 2),
//! ```
//!
//! and the gauge distance between x = (z, h) and x' = (z', h') is
//!
//! ```text
//! |x x'|^4 = |z - z'|^4 + 16 (h - h' - Im(z, z') / 2)^2,
//! ```
//!
//! which equals the gauge N(g) = (|z|^4 + 16 h^2)^{1/4} of the quotient
//! g = x^{-1} x', so the distance is left invariant by construction.
//! Appending an infinitely remote point makes the model a compact Ptolemy
//! space; the maps assembled here (left translations, dilations, unitary
//! rotations, the conjugation flip and the Koranyi inversion) generate
//! enough Moebius automorphisms for every verification suite.
//!
//! Extended points use the flat coordinate layout
//! [re z_1, im z_1, ..., re z_{k-1}, im z_{k-1}, h].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricEvaluator, MoebiusMapHandle};
use crate::point::ExtendedPoint;

/// Complex dimensions k are kept small by configuration so the suites
/// stay fast; raise only deliberately.
pub const MAX_COMPLEX_DIM: usize = 4;

/// A Heisenberg group element (z, h) with z in C^{k-1}.
#[derive(Clone, Debug, PartialEq)]
pub struct HeisElement {
    pub z: Vec<Complex64>,
    pub h: f64,
}

impl HeisElement {
    pub fn new(z: Vec<Complex64>, h: f64) -> Result<Self> {
        if !h.is_finite() || z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidPoint("non-finite Heisenberg component".into()));
        }
        Ok(HeisElement { z, h })
    }

    pub fn identity(base_dim: usize) -> Self {
        HeisElement {
            z: vec![Complex64::ZERO; base_dim],
            h: 0.0,
        }
    }

    pub fn base_dim(&self) -> usize {
        self.z.len()
    }

    pub fn to_point(&self) -> ExtendedPoint {
        let mut coords = Vec::with_capacity(2 * self.z.len() + 1);
        for c in &self.z {
            coords.push(c.re);
            coords.push(c.im);
        }
        coords.push(self.h);
        ExtendedPoint::Finite { coords }
    }

    pub fn from_point(p: &ExtendedPoint) -> Result<Self> {
        let coords = p.expect_coords()?;
        if coords.len() % 2 == 0 || coords.is_empty() {
            return Err(Error::InvalidPoint(format!(
                "Heisenberg points need 2(k-1)+1 coordinates, got {}",
                coords.len()
            )));
        }
        let m = (coords.len() - 1) / 2;
        let z = (0..m)
            .map(|i| Complex64::new(coords[2 * i], coords[2 * i + 1]))
            .collect();
        HeisElement::new(z, coords[coords.len() - 1])
    }
}

/// JSON shape {"z": [[re, im], ...], "h": h}.
#[derive(Serialize, Deserialize)]
struct HeisElementJson {
    z: Vec<[f64; 2]>,
    h: f64,
}

impl Serialize for HeisElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HeisElementJson {
            z: self.z.iter().map(|c| [c.re, c.im]).collect(),
            h: self.h,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HeisElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = HeisElementJson::deserialize(d)?;
        Ok(HeisElement {
            z: raw.z.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
            h: raw.h,
        })
    }
}

/// The Hermitian form (z, z') = sum_i z_i conj(z'_i).
pub fn hermitian(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

fn base_norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

/// Group product (z, h) (z', h') = (z + z', h + h' - Im(z, z') / 2).
pub fn heis_mul(a: &HeisElement, b: &HeisElement) -> Result<HeisElement> {
    if a.base_dim() != b.base_dim() {
        return Err(Error::DimensionMismatch(a.base_dim(), b.base_dim()));
    }
    let z = a.z.iter().zip(&b.z).map(|(x, y)| x + y).collect();
    let h = a.h + b.h - 0.5 * hermitian(&a.z, &b.z).im;
    Ok(HeisElement { z, h })
}

/// Group inverse (z, h)^{-1} = (-z, -h).
pub fn heis_inverse(a: &HeisElement) -> HeisElement {
    HeisElement {
        z: a.z.iter().map(|c| -c).collect(),
        h: -a.h,
    }
}

/// The commutator a b a^{-1} b^{-1}.
pub fn heis_commutator(a: &HeisElement, b: &HeisElement) -> Result<HeisElement> {
    let ab = heis_mul(a, b)?;
    let ab_ainv = heis_mul(&ab, &heis_inverse(a))?;
    heis_mul(&ab_ainv, &heis_inverse(b))
}

/// Koranyi gauge N(z, h) = (|z|^4 + 16 h^2)^{1/4}.
pub fn koranyi_gauge(g: &HeisElement) -> f64 {
    let z2 = base_norm_sq(&g.z);
    (z2 * z2 + 16.0 * g.h * g.h).sqrt().sqrt()
}

/// Gauge distance between finite elements, by direct evaluation of
/// |x x'|^4 = |z - z'|^4 + 16 (h - h' - Im(z, z') / 2)^2.
pub fn koranyi_dist_elems(x: &HeisElement, y: &HeisElement) -> f64 {
    let dz2: f64 = x
        .z
        .iter()
        .zip(&y.z)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let cross = x.h - y.h - 0.5 * hermitian(&x.z, &y.z).im;
    (dz2 * dz2 + 16.0 * cross * cross).sqrt().sqrt()
}

/// The Heisenberg model of complex dimension k (base C^{k-1}).
#[derive(Clone)]
pub struct HeisModel {
    k: usize,
    metric: MetricEvaluator,
}

pub fn heis_model(k: usize) -> Result<HeisModel> {
    HeisModel::new(k)
}

impl HeisModel {
    pub fn new(k: usize) -> Result<Self> {
        if !(2..=MAX_COMPLEX_DIM).contains(&k) {
            return Err(Error::InvalidArgument(format!(
                "complex dimension k must lie in 2..={MAX_COMPLEX_DIM}, got {k}"
            )));
        }
        let metric = MetricEvaluator::new(
            format!("koranyi-k{k}"),
            Some(ExtendedPoint::Infinity),
            move |x, y| match (x.coords(), y.coords()) {
                (Some(_), Some(_)) => {
                    let a = HeisElement::from_point(x).expect("finite point");
                    let b = HeisElement::from_point(y).expect("finite point");
                    koranyi_dist_elems(&a, &b)
                }
                (None, None) => 0.0,
                _ => f64::INFINITY,
            },
        );
        Ok(HeisModel { k, metric })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Complex dimension of the base C^{k-1}.
    pub fn base_complex_dim(&self) -> usize {
        self.k - 1
    }

    /// Real coordinate dimension of a finite point, 2(k-1) + 1.
    pub fn point_dim(&self) -> usize {
        2 * (self.k - 1) + 1
    }

    pub fn metric(&self) -> &MetricEvaluator {
        &self.metric
    }

    pub fn elem(&self, p: &ExtendedPoint) -> Result<HeisElement> {
        let e = HeisElement::from_point(p)?;
        if e.base_dim() != self.base_complex_dim() {
            return Err(Error::DimensionMismatch(
                e.base_dim(),
                self.base_complex_dim(),
            ));
        }
        Ok(e)
    }

    pub fn origin(&self) -> HeisElement {
        HeisElement::identity(self.base_complex_dim())
    }

    /// Gauge distance on extended points.
    pub fn dist(&self, x: &ExtendedPoint, y: &ExtendedPoint) -> f64 {
        self.metric.dist(x, y)
    }
}

fn lift_elem_map<F>(label: String, f: F) -> MoebiusMapHandle
where
    F: Fn(&HeisElement) -> HeisElement + Send + Sync + 'static,
{
    MoebiusMapHandle::new(label, move |p| match HeisElement::from_point(p) {
        Ok(e) => f(&e).to_point(),
        Err(_) => ExtendedPoint::Infinity,
    })
}

/// Left translation x -> g x; an isometry of the gauge metric fixing the
/// infinitely remote point.
pub fn left_translation(g: &HeisElement) -> MoebiusMapHandle {
    let fwd_g = g.clone();
    let inv_g = heis_inverse(g);
    MoebiusMapHandle::with_inverse(
        "left translation",
        move |p| match HeisElement::from_point(p) {
            Ok(e) => heis_mul(&fwd_g, &e).expect("dimensions agree").to_point(),
            Err(_) => ExtendedPoint::Infinity,
        },
        move |p| match HeisElement::from_point(p) {
            Ok(e) => heis_mul(&inv_g, &e).expect("dimensions agree").to_point(),
            Err(_) => ExtendedPoint::Infinity,
        },
    )
}

/// Dilation (z, h) -> (lambda z, lambda^2 h); scales the gauge metric by
/// lambda and fixes the origin and the infinitely remote point.
pub fn dilation(lambda: f64) -> Result<MoebiusMapHandle> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "dilation coefficient must be positive, got {lambda}"
        )));
    }
    let scale = move |e: &HeisElement, l: f64| HeisElement {
        z: e.z.iter().map(|c| c * l).collect(),
        h: e.h * l * l,
    };
    let inv = 1.0 / lambda;
    Ok(MoebiusMapHandle::with_inverse(
        format!("dilation lambda={lambda}"),
        move |p| match HeisElement::from_point(p) {
            Ok(e) => scale(&e, lambda).to_point(),
            Err(_) => ExtendedPoint::Infinity,
        },
        move |p| match HeisElement::from_point(p) {
            Ok(e) => scale(&e, inv).to_point(),
            Err(_) => ExtendedPoint::Infinity,
        },
    ))
}

/// The conjugation flip j(z, h) = (conj z, -h): an isometry reversing the
/// vertical order and fixing the real horizontal line pointwise. j^2 = id.
pub fn conj_flip() -> MoebiusMapHandle {
    MoebiusMapHandle::involution("conjugation flip", |p| match HeisElement::from_point(p) {
        Ok(e) => HeisElement {
            z: e.z.iter().map(|c| c.conj()).collect(),
            h: -e.h,
        }
        .to_point(),
        Err(_) => ExtendedPoint::Infinity,
    })
}

/// Rotation (z, h) -> (U z, h) by a unitary matrix U (rows of `u`).
pub fn unitary_map(u: Vec<Vec<Complex64>>) -> Result<MoebiusMapHandle> {
    let m = u.len();
    if u.iter().any(|row| row.len() != m) {
        return Err(Error::InvalidArgument("unitary matrix must be square".into()));
    }
    for i in 0..m {
        for j in 0..m {
            let s: Complex64 = (0..m).map(|l| u[i][l] * u[j][l].conj()).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            if (s - expected).norm() > 1e-9 {
                return Err(Error::InvalidArgument(
                    "matrix is not unitary within 1e-9".into(),
                ));
            }
        }
    }
    let adjoint: Vec<Vec<Complex64>> = (0..m)
        .map(|i| (0..m).map(|j| u[j][i].conj()).collect())
        .collect();
    let apply = |mat: &[Vec<Complex64>], e: &HeisElement| HeisElement {
        z: (0..mat.len())
            .map(|i| (0..mat.len()).map(|j| mat[i][j] * e.z[j]).sum())
            .collect(),
        h: e.h,
    };
    let u2 = u.clone();
    Ok(MoebiusMapHandle::with_inverse(
        "unitary rotation",
        move |p| match HeisElement::from_point(p) {
            Ok(e) if e.base_dim() == u2.len() => apply(&u2, &e).to_point(),
            _ => ExtendedPoint::Infinity,
        },
        move |p| match HeisElement::from_point(p) {
            Ok(e) if e.base_dim() == adjoint.len() => apply(&adjoint, &e).to_point(),
            _ => ExtendedPoint::Infinity,
        },
    ))
}

/// Koranyi inversion at the origin:
///
/// ```text
/// iota(z, h) = ( -z / (|z|^2 + 4 i h), -h / (|z|^4 + 16 h^2) ),
/// ```
///
/// an involution swapping the origin with the infinitely remote point.
/// The coordinate formula is a derived convenience; the normative property
/// is the metric contract d(iota x, iota y) = d(x, y) / (N(x) N(y)), i.e.
/// the pullback of the gauge metric equals its metric inversion of radius
/// one at the origin. That contract is enforced by tests and suites, not
/// assumed.
pub fn koranyi_inversion() -> MoebiusMapHandle {
    MoebiusMapHandle::involution("koranyi inversion", |p| match HeisElement::from_point(p) {
        Ok(e) => {
            let z2 = base_norm_sq(&e.z);
            let n4 = z2 * z2 + 16.0 * e.h * e.h;
            if n4 == 0.0 {
                return ExtendedPoint::Infinity;
            }
            let denom = Complex64::new(z2, 4.0 * e.h);
            HeisElement {
                z: e.z.iter().map(|c| -c / denom).collect(),
                h: -e.h / n4,
            }
            .to_point()
        }
        Err(_) => HeisElement::from_point(p)
            .map(|e| e.to_point())
            .unwrap_or_else(|_| {
                // The infinitely remote point goes to the origin; the base
                // dimension is not recoverable from it, so the caller fixes
                // it via `koranyi_inversion_for`.
                ExtendedPoint::Infinity
            }),
    })
}

/// Koranyi inversion with the base dimension pinned, so the infinitely
/// remote point maps to the finite origin of the right dimension.
pub fn koranyi_inversion_for(base_dim: usize) -> MoebiusMapHandle {
    let iota = koranyi_inversion();
    MoebiusMapHandle::involution(format!("koranyi inversion (k={})", base_dim + 1), move |p| {
        if p.is_infinite() {
            HeisElement::identity(base_dim).to_point()
        } else {
            iota.apply(p)
        }
    })
}

/// Inversion of radius r: the conjugate delta_r iota delta_{1/r}, which
/// satisfies N(iota_r x) = r^2 / N(x) and realizes the metric inversion of
/// radius r at the origin.
pub fn koranyi_inversion_radius(base_dim: usize, r: f64) -> Result<MoebiusMapHandle> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::RadiusNonPositive(r));
    }
    let iota = koranyi_inversion_for(base_dim);
    let up = dilation(r)?;
    let down = dilation(1.0 / r)?;
    let m = MoebiusMapHandle::compose("tmp", &down, &iota);
    Ok(MoebiusMapHandle::compose(
        format!("koranyi inversion radius {r}"),
        &m,
        &up,
    ))
}

/// Space inversion with poles (omega, omega') and sphere radius r.
///
/// The sphere is measured in the canonical metric with infinitely remote
/// point omega': the gauge metric itself when omega' is the infinitely
/// remote point of the model, and its radius-one metric inversion at
/// omega' when omega' is finite. The map is assembled from translations,
/// dilations and the Koranyi inversion; for two finite poles the dilation
/// coefficient is solved for numerically from the induced-homothety factor,
/// and the defining properties (involution, pole swap, sphere and circle
/// preservation) are checked by the verification suites rather than
/// assumed.
pub fn space_inversion(
    model: &HeisModel,
    omega: &ExtendedPoint,
    omega_prime: &ExtendedPoint,
    r: f64,
) -> Result<MoebiusMapHandle> {
    if omega == omega_prime {
        return Err(Error::CoincidentPoles);
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::RadiusNonPositive(r));
    }
    let base_dim = model.base_complex_dim();
    let conjugate_about = |q: &HeisElement, radius: f64| -> Result<MoebiusMapHandle> {
        let to_origin = left_translation(&heis_inverse(q));
        let back = left_translation(q);
        let iota = koranyi_inversion_radius(base_dim, radius)?;
        let m = MoebiusMapHandle::compose("tmp", &to_origin, &iota);
        Ok(MoebiusMapHandle::compose(
            format!("space inversion about {:?} r={radius}", q.to_point()),
            &m,
            &back,
        ))
    };
    match (omega.is_infinite(), omega_prime.is_infinite()) {
        (true, true) => Err(Error::CoincidentPoles),
        (false, true) => {
            // Sphere of gauge radius r centered at the finite pole.
            let q = model.elem(omega)?;
            conjugate_about(&q, r)
        }
        (true, false) => {
            // The sphere {d_{omega'}(x, infinity) = r} is the gauge sphere
            // of radius 1/r around the finite pole.
            let q = model.elem(omega_prime)?;
            conjugate_about(&q, 1.0 / r)
        }
        (false, false) => {
            let w = model.elem(omega)?;
            let wp = model.elem(omega_prime)?;
            // Send omega' to the infinitely remote point.
            let g = MoebiusMapHandle::compose(
                "to-infinity chart",
                &left_translation(&heis_inverse(&wp)),
                &koranyi_inversion_for(base_dim),
            );
            let g_inv = MoebiusMapHandle::compose(
                "from-infinity chart",
                &koranyi_inversion_for(base_dim),
                &left_translation(&wp),
            );
            let q = model.elem(&g.apply(omega))?;
            let phi_of = |s: f64| -> Result<MoebiusMapHandle> {
                let core = conjugate_about(&q, s)?;
                let m = MoebiusMapHandle::compose("tmp", &g, &core);
                Ok(MoebiusMapHandle::compose(
                    format!("space inversion ({:?} <-> {:?})", w.to_point(), wp.to_point()),
                    &m,
                    &g_inv,
                ))
            };
            // The induced metric factor scales as s^2; calibrate at s = 1.
            let d = crate::metric::m_invert(model.metric(), omega_prime, 1.0)?;
            let phi1 = phi_of(1.0)?;
            let lambda_from = |x: &ExtendedPoint, y: &ExtendedPoint| -> f64 {
                let im_x = phi1.apply(x);
                let im_y = phi1.apply(y);
                d.dist(&im_x, &im_y) * d.dist(x, omega) * d.dist(y, omega) / d.dist(x, y)
            };
            let mut probe = w.clone();
            probe.z[0] += Complex64::new(0.731, 0.312);
            probe.h += 0.47;
            let mut probe2 = w.clone();
            probe2.z[0] += Complex64::new(-0.388, 0.529);
            probe2.h -= 0.233;
            let lambda = lambda_from(&probe.to_point(), &probe2.to_point());
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(Error::InvalidArgument(
                    "could not calibrate the space inversion".into(),
                ));
            }
            phi_of(r / lambda.sqrt())
        }
    }
}

/// Base projection pi(z, h) = z.
pub fn fibration_project(x: &HeisElement) -> Vec<Complex64> {
    x.z.clone()
}

/// The point of the fiber over `z0` joined to `x` by a horizontal line:
/// mu(x) = (z0, h - Im(z, z0) / 2) for x = (z, h).
pub fn mu_project(x: &HeisElement, z0: &[Complex64]) -> HeisElement {
    HeisElement {
        z: z0.to_vec(),
        h: x.h - 0.5 * hermitian(&x.z, z0).im,
    }
}

/// A unit-speed horizontal line t -> g (t zeta, 0).
#[derive(Clone, Debug)]
pub struct HorizontalLine {
    pub base: HeisElement,
    pub dir: Vec<Complex64>,
}

pub fn horizontal_line(g: &HeisElement, dir: Vec<Complex64>) -> Result<HorizontalLine> {
    if dir.len() != g.base_dim() {
        return Err(Error::DimensionMismatch(dir.len(), g.base_dim()));
    }
    let n = base_norm_sq(&dir).sqrt();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NonUnitDirection(n));
    }
    Ok(HorizontalLine {
        base: g.clone(),
        dir,
    })
}

impl HorizontalLine {
    pub fn at(&self, t: f64) -> HeisElement {
        let z: Vec<Complex64> = self
            .base
            .z
            .iter()
            .zip(&self.dir)
            .map(|(b, d)| b + t * d)
            .collect();
        let h = self.base.h - 0.5 * t * hermitian(&self.base.z, &self.dir).im;
        HeisElement { z, h }
    }

    pub fn reversed(&self) -> HorizontalLine {
        HorizontalLine {
            base: self.base.clone(),
            dir: self.dir.iter().map(|c| -c).collect(),
        }
    }
}

/// A vertical fiber {(z0, h)}: together with the infinitely remote point
/// it forms the unique vertical circle through its points.
#[derive(Clone, Debug)]
pub struct CLine {
    pub z0: Vec<Complex64>,
}

impl CLine {
    pub fn at(&self, h: f64) -> HeisElement {
        HeisElement {
            z: self.z0.clone(),
            h,
        }
    }
}

/// The unique vertical circle through two distinct extended points,
/// sampled. If the points share a base point (or one is infinitely
/// remote) this is a vertical fiber closed up through the infinitely
/// remote point; otherwise it is the image of such a fiber under the
/// inversion centered at `q`, constructed so it passes through both.
#[derive(Clone)]
pub enum CCircle {
    Fiber(CLine),
    Inverted {
        /// Evaluate at a fiber parameter; the image closes up at `q`.
        eval: std::sync::Arc<dyn Fn(f64) -> ExtendedPoint + Send + Sync>,
        q: HeisElement,
        /// Fiber parameter whose image is the first defining point.
        p_param: f64,
    },
}

impl CCircle {
    /// Sampled points, finite ones only, spread over the whole circle.
    pub fn sample(&self, n: usize, span: f64) -> Vec<ExtendedPoint> {
        match self {
            CCircle::Fiber(f) => (0..n)
                .map(|i| {
                    let s = -span + 2.0 * span * i as f64 / (n - 1).max(1) as f64;
                    f.at(s).to_point()
                })
                .collect(),
            CCircle::Inverted { eval, .. } => (0..n)
                .map(|i| {
                    let s = -span + 2.0 * span * i as f64 / (n - 1).max(1) as f64;
                    eval(s)
                })
                .collect(),
        }
    }

    pub fn is_fiber(&self) -> bool {
        matches!(self, CCircle::Fiber(_))
    }
}

pub fn c_circle_through(
    model: &HeisModel,
    p: &ExtendedPoint,
    q: &ExtendedPoint,
) -> Result<CCircle> {
    if p == q {
        return Err(Error::CoincidentPoints);
    }
    let fiber_of = |x: &ExtendedPoint| -> Result<CLine> {
        Ok(CLine {
            z0: model.elem(x)?.z,
        })
    };
    match (p.is_infinite(), q.is_infinite()) {
        (true, true) => Err(Error::CoincidentPoints),
        (true, false) => Ok(CCircle::Fiber(fiber_of(q)?)),
        (false, true) => Ok(CCircle::Fiber(fiber_of(p)?)),
        (false, false) => {
            let pe = model.elem(p)?;
            let qe = model.elem(q)?;
            let same_base = pe
                .z
                .iter()
                .zip(&qe.z)
                .all(|(a, b)| a == b);
            if same_base {
                return Ok(CCircle::Fiber(CLine { z0: pe.z }));
            }
            // Swap q with the infinitely remote point, take the fiber
            // through the image of p, map back.
            let phi = space_inversion(model, q, &ExtendedPoint::Infinity, 1.0)?;
            let p_image = model.elem(&phi.apply(p))?;
            let p_param = p_image.h;
            let fiber = CLine { z0: p_image.z };
            let phi2 = phi.clone();
            Ok(CCircle::Inverted {
                eval: std::sync::Arc::new(move |s: f64| phi2.apply(&fiber.at(s).to_point())),
                q: qe,
                p_param,
            })
        }
    }
}

/// A closed curve parameterized over [0, 2 pi), the image of a horizontal
/// line closed up through the infinitely remote point under an inversion.
#[derive(Clone)]
pub struct RCircle {
    eval: std::sync::Arc<dyn Fn(f64) -> HeisElement + Send + Sync>,
}

impl RCircle {
    pub fn at(&self, u: f64) -> HeisElement {
        (self.eval)(u)
    }

    pub fn point_at(&self, u: f64) -> ExtendedPoint {
        self.at(u).to_point()
    }

    /// `n` cyclically ordered samples over one period.
    pub fn sample(&self, n: usize) -> Vec<ExtendedPoint> {
        (0..n)
            .map(|i| self.point_at(2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .collect()
    }
}

/// The image of `line` (closed up through the infinitely remote point)
/// under `inv`. The parameter u in [0, 2 pi) traverses the line once via
/// t = tan((u - pi) / 2), with u = 0 giving the image of the infinitely
/// remote point. Fails if the line meets the inversion pole.
pub fn r_circle_from_line(line: &HorizontalLine, inv: &MoebiusMapHandle) -> Result<RCircle> {
    // Scan for a pole on the line: the image would be infinitely remote.
    for i in 0..4096 {
        let t = ((i as f64 / 4096.0) * std::f64::consts::PI - std::f64::consts::PI / 2.0).tan();
        if inv.apply(&line.at(t).to_point()).is_infinite() {
            return Err(Error::PoleOnLine);
        }
    }
    let at_infinity = inv.apply(&ExtendedPoint::Infinity);
    if at_infinity.is_infinite() {
        return Err(Error::PoleOnLine);
    }
    let line = line.clone();
    let inv = inv.clone();
    let closing = HeisElement::from_point(&at_infinity)?;
    Ok(RCircle {
        eval: std::sync::Arc::new(move |u: f64| {
            let wrapped = u.rem_euclid(2.0 * std::f64::consts::PI);
            if wrapped == 0.0 {
                return closing.clone();
            }
            let t = ((wrapped - std::f64::consts::PI) / 2.0).tan();
            let image = inv.apply(&line.at(t).to_point());
            HeisElement::from_point(&image).expect("pole was excluded by construction")
        }),
    })
}

/// The bounded circle of gauge radius one produced by inverting the
/// horizontal line at height 1/8 through the central fiber. It meets the
/// central fiber at (0, 0) and (0, -1/2), and every point of it has gauge
/// distance one from the fiber midpoint (0, -1/4).
pub fn standard_unit_r_circle(model: &HeisModel) -> Result<RCircle> {
    let m = model.base_complex_dim();
    let mut dir = vec![Complex64::ZERO; m];
    dir[0] = Complex64::ONE;
    let base = HeisElement::new(vec![Complex64::ZERO; m], 0.125)?;
    let line = horizontal_line(&base, dir)?;
    r_circle_from_line(&line, &koranyi_inversion_for(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{m_invert, pullback};
    use crate::rng;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_elem<R: Rng>(rng: &mut R, m: usize, scale: f64) -> HeisElement {
        HeisElement {
            z: (0..m)
                .map(|_| c(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
                .collect(),
            h: rng.random_range(-scale..scale),
        }
    }

    #[test]
    fn group_identity_and_example() {
        let g = HeisElement::new(vec![c(1.0, 0.0)], 0.0).unwrap();
        let e = HeisElement::identity(1);
        assert_eq!(heis_mul(&g, &e).unwrap(), g);
        // (1, 0) (i, 0) = (1 + i, 1/2) since Im(1 conj(i)) = -1.
        let gi = HeisElement::new(vec![c(0.0, 1.0)], 0.0).unwrap();
        let prod = heis_mul(&g, &gi).unwrap();
        assert_eq!(prod.z, vec![c(1.0, 1.0)]);
        assert!((prod.h - 0.5).abs() < 1e-15);
    }

    #[test]
    fn commutator_generates_the_center() {
        let a = HeisElement::new(vec![c(1.0, 0.0)], 0.0).unwrap();
        let b = HeisElement::new(vec![c(0.0, 1.0)], 0.0).unwrap();
        let comm = heis_commutator(&a, &b).unwrap();
        assert!(comm.z.iter().all(|v| v.norm() == 0.0));
        assert!((comm.h - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_law() {
        let mut rng = rng::stream(5, "heis-inverse");
        for _ in 0..50 {
            let g = random_elem(&mut rng, 2, 2.0);
            let p = heis_mul(&g, &heis_inverse(&g)).unwrap();
            assert_eq!(p.z, vec![Complex64::ZERO; 2]);
            assert_eq!(p.h, 0.0);
        }
    }

    #[test]
    fn associativity_sampled() {
        let mut rng = rng::stream(6, "heis-assoc");
        for _ in 0..200 {
            let a = random_elem(&mut rng, 2, 2.0);
            let b = random_elem(&mut rng, 2, 2.0);
            let g = random_elem(&mut rng, 2, 2.0);
            let left = heis_mul(&heis_mul(&a, &b).unwrap(), &g).unwrap();
            let right = heis_mul(&a, &heis_mul(&b, &g).unwrap()).unwrap();
            assert!((left.h - right.h).abs() < 1e-12);
            for (x, y) in left.z.iter().zip(&right.z) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gauge_examples() {
        assert!((koranyi_gauge(&HeisElement::new(vec![c(0.0, 0.0)], 1.0).unwrap()) - 2.0).abs() < 1e-15);
        let z = HeisElement::new(vec![c(0.3, -0.4)], 0.0).unwrap();
        assert!((koranyi_gauge(&z) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distance_matches_quotient_gauge_and_is_symmetric() {
        let mut rng = rng::stream(7, "heis-dist");
        for _ in 0..200 {
            let x = random_elem(&mut rng, 1, 2.0);
            let y = random_elem(&mut rng, 1, 2.0);
            let direct = koranyi_dist_elems(&x, &y);
            let quotient = koranyi_gauge(&heis_mul(&heis_inverse(&x), &y).unwrap());
            assert!((direct - quotient).abs() <= 1e-12 * direct.max(1.0));
            assert_eq!(direct, koranyi_dist_elems(&y, &x));
        }
    }

    #[test]
    fn metric_examples() {
        let model = HeisModel::new(2).unwrap();
        let o = HeisElement::new(vec![c(0.0, 0.0)], 0.0).unwrap();
        let v = HeisElement::new(vec![c(0.0, 0.0)], 1.0).unwrap();
        assert!((model.dist(&o.to_point(), &v.to_point()) - 2.0).abs() < 1e-15);
        assert_eq!(
            model.dist(&o.to_point(), &ExtendedPoint::Infinity),
            f64::INFINITY
        );
    }

    #[test]
    fn left_invariance() {
        let mut rng = rng::stream(8, "heis-left");
        for _ in 0..100 {
            let g = random_elem(&mut rng, 2, 2.0);
            let x = random_elem(&mut rng, 2, 2.0);
            let y = random_elem(&mut rng, 2, 2.0);
            let before = koranyi_dist_elems(&x, &y);
            let after = koranyi_dist_elems(
                &heis_mul(&g, &x).unwrap(),
                &heis_mul(&g, &y).unwrap(),
            );
            assert!((before - after).abs() <= 1e-12 * before.max(1.0));
        }
    }

    #[test]
    fn dilation_scales_the_metric() {
        let model = HeisModel::new(2).unwrap();
        let f = dilation(2.0).unwrap();
        let mut rng = rng::stream(9, "heis-dilate");
        for _ in 0..100 {
            let x = random_elem(&mut rng, 1, 2.0).to_point();
            let y = random_elem(&mut rng, 1, 2.0).to_point();
            let before = model.dist(&x, &y);
            let after = model.dist(&f.apply(&x), &f.apply(&y));
            assert!((after - 2.0 * before).abs() <= 1e-12 * after.max(1.0));
        }
        // Homogeneity of the gauge: N(delta_3 g) = 3 N(g).
        let g = random_elem(&mut rng, 1, 2.0);
        let d3 = dilation(3.0).unwrap();
        let scaled = HeisElement::from_point(&d3.apply(&g.to_point())).unwrap();
        assert!((koranyi_gauge(&scaled) - 3.0 * koranyi_gauge(&g)).abs() < 1e-12 * koranyi_gauge(&g).max(1.0));
    }

    #[test]
    fn conj_flip_is_an_order_reversing_isometry() {
        let model = HeisModel::new(2).unwrap();
        let j = conj_flip();
        let v = HeisElement::new(vec![c(0.0, 0.0)], 1.0).unwrap().to_point();
        assert_eq!(
            j.apply(&v),
            HeisElement::new(vec![c(0.0, 0.0)], -1.0).unwrap().to_point()
        );
        let mut rng = rng::stream(10, "heis-flip");
        for _ in 0..100 {
            let x = random_elem(&mut rng, 1, 2.0).to_point();
            let y = random_elem(&mut rng, 1, 2.0).to_point();
            assert_eq!(j.apply(&j.apply(&x)), x);
            let before = model.dist(&x, &y);
            let after = model.dist(&j.apply(&x), &j.apply(&y));
            assert!((before - after).abs() <= 1e-12 * before.max(1.0));
        }
    }

    #[test]
    fn koranyi_inversion_examples() {
        let iota = koranyi_inversion_for(1);
        // On a horizontal line through the origin: (t, 0) -> (-1/t, 0).
        let x = HeisElement::new(vec![c(2.0, 0.0)], 0.0).unwrap();
        let img = HeisElement::from_point(&iota.apply(&x.to_point())).unwrap();
        assert!((img.z[0] - c(-0.5, 0.0)).norm() < 1e-15);
        assert!(img.h.abs() < 1e-15);
        // On the central fiber: (0, h) -> (0, -1/(16 h)).
        let v = HeisElement::new(vec![c(0.0, 0.0)], 0.25).unwrap();
        let img = HeisElement::from_point(&iota.apply(&v.to_point())).unwrap();
        assert!(img.z[0].norm() < 1e-15);
        assert!((img.h + 0.25).abs() < 1e-15);
        // Origin and infinitely remote point swap.
        let o = HeisElement::identity(1).to_point();
        assert_eq!(iota.apply(&o), ExtendedPoint::Infinity);
        assert_eq!(iota.apply(&ExtendedPoint::Infinity), o);
    }

    #[test]
    fn koranyi_inversion_metric_contract() {
        let model = HeisModel::new(2).unwrap();
        let iota = koranyi_inversion_for(1);
        let pulled = pullback(model.metric(), &iota);
        let origin = HeisElement::identity(1).to_point();
        let mi = m_invert(model.metric(), &origin, 1.0).unwrap();
        let mut rng = rng::stream(11, "heis-iota");
        for _ in 0..2000 {
            let x = random_elem(&mut rng, 1, 2.0).to_point();
            let y = random_elem(&mut rng, 1, 2.0).to_point();
            if x == y || x == origin || y == origin {
                continue;
            }
            let a = pulled.dist(&x, &y);
            let b = mi.dist(&x, &y);
            assert!((a - b).abs() <= 1e-10 * b.max(1e-12), "{a} vs {b}");
        }
        // Involution on samples.
        for _ in 0..100 {
            let x = random_elem(&mut rng, 1, 2.0).to_point();
            let back = iota.apply(&iota.apply(&x));
            let e1 = HeisElement::from_point(&x).unwrap();
            let e2 = HeisElement::from_point(&back).unwrap();
            assert!((e1.z[0] - e2.z[0]).norm() < 1e-12);
            assert!((e1.h - e2.h).abs() < 1e-12);
        }
    }

    #[test]
    fn space_inversion_at_infinity_has_no_fixed_points() {
        let model = HeisModel::new(2).unwrap();
        let origin = HeisElement::identity(1).to_point();
        let phi = space_inversion(&model, &origin, &ExtendedPoint::Infinity, 1.0).unwrap();
        // This is the Koranyi inversion itself.
        let mut rng = rng::stream(12, "heis-space-inv");
        for _ in 0..2000 {
            let x = random_elem(&mut rng, 1, 3.0).to_point();
            let image = phi.apply(&x);
            if image == x {
                panic!("fixed point found at {x:?}");
            }
        }
        assert_eq!(phi.apply(&origin), ExtendedPoint::Infinity);
        assert_eq!(phi.apply(&ExtendedPoint::Infinity), origin);
    }

    #[test]
    fn space_inversion_finite_poles_swaps_and_involutes() {
        let model = HeisModel::new(2).unwrap();
        let w = HeisElement::new(vec![c(1.0, 0.0)], 0.0).unwrap().to_point();
        let wp = HeisElement::new(vec![c(0.0, 1.0)], 0.3).unwrap().to_point();
        let phi = space_inversion(&model, &w, &wp, 1.3).unwrap();
        let near = |a: &ExtendedPoint, b: &ExtendedPoint| match (a.coords(), b.coords()) {
            (Some(x), Some(y)) => crate::vecn::dist(x, y) < 1e-9,
            (None, None) => true,
            _ => false,
        };
        assert!(near(&phi.apply(&w), &wp));
        assert!(near(&phi.apply(&wp), &w));
        let mut rng = rng::stream(13, "heis-space-inv-finite");
        for _ in 0..200 {
            let x = random_elem(&mut rng, 1, 2.0).to_point();
            let back = phi.apply(&phi.apply(&x));
            assert!(near(&back, &x), "not involutive at {x:?}");
        }
        // The preserved sphere: d_{omega'}(x, omega) = 1.3 maps to itself.
        let d = m_invert(model.metric(), &wp, 1.0).unwrap();
        for _ in 0..200 {
            let dir = random_elem(&mut rng, 1, 1.0);
            let gauge = koranyi_gauge(&dir);
            if gauge < 1e-3 {
                continue;
            }
            // Scale the offset so that x sits on the sphere of d-radius 1.3
            // around omega; bisection on the scaling factor.
            let mut lo = 1e-3;
            let mut hi = 1e3;
            let radius_at = |s: f64| -> f64 {
                let scaled = HeisElement {
                    z: dir.z.iter().map(|v| v * s).collect(),
                    h: dir.h * s * s,
                };
                let x = heis_mul(
                    &HeisElement::from_point(&w).unwrap(),
                    &scaled,
                )
                .unwrap();
                d.dist(&x.to_point(), &w)
            };
            if (radius_at(lo) - 1.3) * (radius_at(hi) - 1.3) > 0.0 {
                continue;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if (radius_at(lo) - 1.3) * (radius_at(mid) - 1.3) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let s = 0.5 * (lo + hi);
            let x = heis_mul(
                &HeisElement::from_point(&w).unwrap(),
                &HeisElement {
                    z: dir.z.iter().map(|v| v * s).collect(),
                    h: dir.h * s * s,
                },
            )
            .unwrap()
            .to_point();
            let r_before = d.dist(&x, &w);
            let r_after = d.dist(&phi.apply(&x), &w);
            assert!(
                (r_after - r_before).abs() < 1e-7 * r_before,
                "sphere not preserved: {r_before} -> {r_after}"
            );
        }
    }

    #[test]
    fn mu_projection_examples() {
        // x = (1, 0), z0 = i gives mu(x) = (i, 1/2).
        let x = HeisElement::new(vec![c(1.0, 0.0)], 0.0).unwrap();
        let mu = mu_project(&x, &[c(0.0, 1.0)]);
        assert_eq!(mu.z, vec![c(0.0, 1.0)]);
        assert!((mu.h - 0.5).abs() < 1e-15);
        // mu is the identity on the fiber of x.
        let same = mu_project(&x, &x.z.clone());
        assert_eq!(same, x);
        // x and mu(x) lie on a common horizontal line: the gauge distance
        // equals the base distance.
        let d = koranyi_dist_elems(&x, &mu);
        let base: f64 = x
            .z
            .iter()
            .zip(&mu.z)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!((d - base).abs() < 1e-15);
    }

    #[test]
    fn horizontal_lines_are_unit_speed() {
        let mut rng = rng::stream(14, "heis-line");
        for _ in 0..50 {
            let g = random_elem(&mut rng, 2, 2.0);
            let mut dir = vec![
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            ];
            let n = (dir[0].norm_sqr() + dir[1].norm_sqr()).sqrt();
            for v in &mut dir {
                *v /= n;
            }
            let line = horizontal_line(&g, dir).unwrap();
            let s = rng.random_range(-3.0..3.0);
            let t = rng.random_range(-3.0..3.0);
            let d = koranyi_dist_elems(&line.at(s), &line.at(t));
            assert!((d - (s - t).abs()).abs() < 1e-12);
        }
        // Direction must be unit.
        let g = HeisElement::identity(1);
        assert!(matches!(
            horizontal_line(&g, vec![c(2.0, 0.0)]),
            Err(Error::NonUnitDirection(_))
        ));
    }

    #[test]
    fn fiber_metric_closed_form() {
        let x = HeisElement::new(vec![c(0.7, -0.2)], 0.9).unwrap();
        let y = HeisElement::new(vec![c(0.7, -0.2)], -0.3).unwrap();
        let d = koranyi_dist_elems(&x, &y);
        assert!((d - 2.0 * (x.h - y.h).abs().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn c_circle_cases() {
        let model = HeisModel::new(2).unwrap();
        let p = HeisElement::new(vec![c(0.0, 0.0)], 0.0).unwrap().to_point();
        let q = HeisElement::new(vec![c(0.0, 0.0)], 5.0).unwrap().to_point();
        assert!(c_circle_through(&model, &p, &q).unwrap().is_fiber());
        assert!(c_circle_through(&model, &p, &ExtendedPoint::Infinity)
            .unwrap()
            .is_fiber());
        assert!(matches!(
            c_circle_through(&model, &p, &p),
            Err(Error::CoincidentPoints)
        ));
        // Generic pair: the constructed circle passes through both.
        let r = HeisElement::new(vec![c(1.0, 0.5)], 0.2).unwrap().to_point();
        let circle = c_circle_through(&model, &p, &r).unwrap();
        match &circle {
            CCircle::Inverted { eval, q, p_param } => {
                let at_p = eval(*p_param);
                assert!(
                    crate::vecn::dist(at_p.coords().unwrap(), p.coords().unwrap()) < 1e-9,
                    "curve misses p: {at_p:?}"
                );
                assert!((koranyi_dist_elems(q, &model.elem(&r).unwrap())).abs() < 1e-12);
            }
            CCircle::Fiber(_) => panic!("expected an inverted fiber"),
        }
    }

    #[test]
    fn unit_r_circle_geometry() {
        let model = HeisModel::new(2).unwrap();
        let circle = standard_unit_r_circle(&model).unwrap();
        // Fiber crossings at u = 0 (image of the remote point) and u = pi.
        let x = circle.at(0.0);
        let y = circle.at(std::f64::consts::PI);
        assert!(x.z[0].norm() < 1e-12 && x.h.abs() < 1e-12);
        assert!(y.z[0].norm() < 1e-12 && (y.h + 0.5).abs() < 1e-12);
        // Unit gauge radius about the fiber midpoint (0, -1/4).
        let center = HeisElement::new(vec![c(0.0, 0.0)], -0.25).unwrap();
        for i in 0..64 {
            let u = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
            let w = circle.at(u);
            let r = koranyi_dist_elems(&center, &w);
            assert!((r - 1.0).abs() < 1e-12, "radius {r} at u={u}");
        }
        // It is a genuine circle for the cross-ratio classification.
        let res = crate::metric::circle_residual(model.metric(), &circle.sample(16)).unwrap();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn r_circle_rejects_pole_on_line() {
        let model = HeisModel::new(2).unwrap();
        let line = horizontal_line(&model.origin(), vec![c(1.0, 0.0)]).unwrap();
        assert!(matches!(
            r_circle_from_line(&line, &koranyi_inversion_for(1)),
            Err(Error::PoleOnLine)
        ));
    }

    #[test]
    fn heis_element_json_shape() {
        let e = HeisElement::new(vec![c(1.0, -2.0)], 0.5).unwrap();
        let s = serde_json::to_string(&e).unwrap();
        assert_eq!(s, r#"{"z":[[1.0,-2.0]],"h":0.5}"#);
        let back: HeisElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
    }
}
