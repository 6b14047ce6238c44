//! Model abstractions used by the numerical geodesy routines.
//!
//! A `LineGeometry` exposes what Busemann-function machinery needs: a
//! metric, unit-speed lines through any point in any oriented direction,
//! and the convention that the line through x with the same direction is
//! the Busemann-parallel transport of a line (true in both bundled models,
//! by vector translation in the Euclidean one and by left translation in
//! the Heisenberg one). A `FiberedGeometry` adds the vertical fibration
//! with its Euclidean base, horizontal projections between fibers, and the
//! order on fibers, which is what the lifting and holonomy routines need.

use std::cmp::Ordering;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::euclidean::EuclideanModel;
use crate::heisenberg::{
    heis_mul, horizontal_line, mu_project, HeisElement, HeisModel,
};
use crate::metric::MetricEvaluator;
use crate::point::ExtendedPoint;
use crate::vecn;

/// A unit-speed parameterized line in a model.
#[derive(Clone)]
pub struct ModelLine {
    eval: Arc<dyn Fn(f64) -> ExtendedPoint + Send + Sync>,
    base: ExtendedPoint,
    dir: Vec<f64>,
}

impl ModelLine {
    pub fn new<F>(base: ExtendedPoint, dir: Vec<f64>, eval: F) -> Self
    where
        F: Fn(f64) -> ExtendedPoint + Send + Sync + 'static,
    {
        ModelLine {
            eval: Arc::new(eval),
            base,
            dir,
        }
    }

    pub fn at(&self, t: f64) -> ExtendedPoint {
        (self.eval)(t)
    }

    pub fn base(&self) -> &ExtendedPoint {
        &self.base
    }

    pub fn dir(&self) -> &[f64] {
        &self.dir
    }

    /// The same line with the opposite orientation.
    pub fn reversed(&self) -> ModelLine {
        let eval = self.eval.clone();
        ModelLine {
            eval: Arc::new(move |t| eval(-t)),
            base: self.base.clone(),
            dir: self.dir.iter().map(|x| -x).collect(),
        }
    }
}

pub trait LineGeometry {
    /// Real coordinate dimension of a finite point.
    fn point_dim(&self) -> usize;

    /// Dimension of the direction space for lines.
    fn dir_dim(&self) -> usize;

    fn metric(&self) -> &MetricEvaluator;

    fn dist(&self, x: &ExtendedPoint, y: &ExtendedPoint) -> f64 {
        self.metric().dist(x, y)
    }

    /// The unit-speed line through `base` with oriented unit direction
    /// `dir`; for a fixed direction, varying the base sweeps the family of
    /// Busemann-parallel lines with compatible orientations.
    fn line_through(&self, base: &ExtendedPoint, dir: &[f64]) -> Result<ModelLine>;

    /// Direction of the chord from one nearby point to another, used for
    /// secant approximations of tangent directions.
    fn chord_direction(&self, from: &ExtendedPoint, to: &ExtendedPoint) -> Result<Vec<f64>>;

    fn random_direction<R: Rng>(&self, rng: &mut R) -> Vec<f64>
    where
        Self: Sized,
    {
        loop {
            let v: Vec<f64> = (0..self.dir_dim())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            if let Some(u) = vecn::normalize(&v) {
                if vecn::norm(&v) > 0.1 {
                    return u;
                }
            }
        }
    }

    fn random_point<R: Rng>(&self, rng: &mut R, scale: f64) -> ExtendedPoint
    where
        Self: Sized,
    {
        ExtendedPoint::Finite {
            coords: (0..self.point_dim())
                .map(|_| rng.random_range(-scale..scale))
                .collect(),
        }
    }
}

impl LineGeometry for EuclideanModel {
    fn point_dim(&self) -> usize {
        self.dim()
    }

    fn dir_dim(&self) -> usize {
        self.dim()
    }

    fn metric(&self) -> &MetricEvaluator {
        EuclideanModel::metric(self)
    }

    fn line_through(&self, base: &ExtendedPoint, dir: &[f64]) -> Result<ModelLine> {
        let b = base.expect_coords()?.to_vec();
        let n = vecn::norm(dir);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitDirection(n));
        }
        if dir.len() != self.dim() {
            return Err(Error::DimensionMismatch(dir.len(), self.dim()));
        }
        let d = dir.to_vec();
        let b2 = b.clone();
        Ok(ModelLine::new(base.clone(), d.clone(), move |t| {
            ExtendedPoint::Finite {
                coords: vecn::axpy(&b2, t, &d),
            }
        }))
    }

    fn chord_direction(&self, from: &ExtendedPoint, to: &ExtendedPoint) -> Result<Vec<f64>> {
        let a = from.expect_coords()?;
        let b = to.expect_coords()?;
        vecn::normalize(&vecn::sub(b, a)).ok_or(Error::CoincidentPoints)
    }
}

pub(crate) fn dir_to_complex(dir: &[f64]) -> Vec<Complex64> {
    dir.chunks(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect()
}

pub(crate) fn complex_to_flat(z: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * z.len());
    for c in z {
        out.push(c.re);
        out.push(c.im);
    }
    out
}

impl LineGeometry for HeisModel {
    fn point_dim(&self) -> usize {
        HeisModel::point_dim(self)
    }

    fn dir_dim(&self) -> usize {
        2 * self.base_complex_dim()
    }

    fn metric(&self) -> &MetricEvaluator {
        HeisModel::metric(self)
    }

    fn line_through(&self, base: &ExtendedPoint, dir: &[f64]) -> Result<ModelLine> {
        if dir.len() != self.dir_dim() {
            return Err(Error::DimensionMismatch(dir.len(), self.dir_dim()));
        }
        let g = self.elem(base)?;
        let line = horizontal_line(&g, dir_to_complex(dir))?;
        Ok(ModelLine::new(base.clone(), dir.to_vec(), move |t| {
            line.at(t).to_point()
        }))
    }

    fn chord_direction(&self, from: &ExtendedPoint, to: &ExtendedPoint) -> Result<Vec<f64>> {
        let a = self.elem(from)?;
        let b = self.elem(to)?;
        let dz: Vec<Complex64> = b.z.iter().zip(&a.z).map(|(x, y)| x - y).collect();
        vecn::normalize(&complex_to_flat(&dz)).ok_or(Error::CoincidentPoints)
    }
}

pub trait FiberedGeometry: LineGeometry {
    /// Real dimension of the base of the vertical fibration.
    fn base_dim(&self) -> usize;

    /// Base projection of a finite point.
    fn project(&self, x: &ExtendedPoint) -> Result<Vec<f64>>;

    /// The point of the fiber over `base_target` joined to `x` by a
    /// horizontal line.
    fn mu_to(&self, x: &ExtendedPoint, base_target: &[f64]) -> Result<ExtendedPoint>;

    /// Distance between two points of a common fiber.
    fn fiber_dist(&self, x: &ExtendedPoint, y: &ExtendedPoint) -> Result<f64>;

    /// The vertical order within a fiber.
    fn order_cmp(&self, x: &ExtendedPoint, y: &ExtendedPoint) -> Result<Ordering>;

    /// The canonical point over a base point.
    fn base_point(&self, base: &[f64]) -> Result<ExtendedPoint>;

    /// The point of the fiber of `x` at signed squared fiber distance
    /// `signed_sq` from it, positive meaning above in the vertical order.
    fn fiber_offset(&self, x: &ExtendedPoint, signed_sq: f64) -> Result<ExtendedPoint>;
}

impl FiberedGeometry for HeisModel {
    fn base_dim(&self) -> usize {
        2 * self.base_complex_dim()
    }

    fn project(&self, x: &ExtendedPoint) -> Result<Vec<f64>> {
        let e = self.elem(x)?;
        Ok(complex_to_flat(&e.z))
    }

    fn mu_to(&self, x: &ExtendedPoint, base_target: &[f64]) -> Result<ExtendedPoint> {
        if base_target.len() != self.base_dim() {
            return Err(Error::DimensionMismatch(base_target.len(), self.base_dim()));
        }
        let e = self.elem(x)?;
        Ok(mu_project(&e, &dir_to_complex(base_target)).to_point())
    }

    fn fiber_dist(&self, x: &ExtendedPoint, y: &ExtendedPoint) -> Result<f64> {
        let a = self.elem(x)?;
        let b = self.elem(y)?;
        let base_gap: f64 = a
            .z
            .iter()
            .zip(&b.z)
            .map(|(p, q)| (p - q).norm())
            .sum();
        if base_gap > 1e-9 {
            return Err(Error::InvalidArgument(
                "points do not lie in a common fiber".into(),
            ));
        }
        Ok(2.0 * (a.h - b.h).abs().sqrt())
    }

    fn order_cmp(&self, x: &ExtendedPoint, y: &ExtendedPoint) -> Result<Ordering> {
        let a = self.elem(x)?;
        let b = self.elem(y)?;
        Ok(a.h.total_cmp(&b.h))
    }

    fn base_point(&self, base: &[f64]) -> Result<ExtendedPoint> {
        if base.len() != self.base_dim() {
            return Err(Error::DimensionMismatch(base.len(), self.base_dim()));
        }
        Ok(HeisElement::new(dir_to_complex(base), 0.0)?.to_point())
    }

    fn fiber_offset(&self, x: &ExtendedPoint, signed_sq: f64) -> Result<ExtendedPoint> {
        let e = self.elem(x)?;
        // The fiber metric is 2 sqrt(|dh|), so a signed squared distance
        // of s corresponds to a vertical displacement of s / 4.
        Ok(HeisElement::new(e.z, e.h + signed_sq / 4.0)?.to_point())
    }
}

/// Translate a Heisenberg model point by the group element over `shift`
/// in the base with vertical part zero. Used by samplers that need to move
/// whole configurations around.
pub fn heis_base_shift(model: &HeisModel, x: &ExtendedPoint, shift: &[f64]) -> Result<ExtendedPoint> {
    let g = HeisElement::new(dir_to_complex(shift), 0.0)?;
    let e = model.elem(x)?;
    Ok(heis_mul(&g, &e)?.to_point())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidean::euclidean_model;
    use crate::point::pt;

    #[test]
    fn euclid_lines_are_unit_speed() {
        let m = euclidean_model(3).unwrap();
        let l = m
            .line_through(&pt(&[1.0, 0.0, 2.0]), &[0.0, 1.0, 0.0])
            .unwrap();
        let a = l.at(1.5);
        let b = l.at(-2.0);
        assert!((m.dist(&a, &b) - 3.5).abs() < 1e-15);
        let r = l.reversed();
        assert_eq!(r.at(2.0), l.at(-2.0));
    }

    #[test]
    fn heis_line_trait_matches_horizontal_line() {
        let m = HeisModel::new(2).unwrap();
        let base = HeisElement::new(vec![Complex64::new(0.5, -0.25)], 0.75)
            .unwrap()
            .to_point();
        let l = m.line_through(&base, &[0.0, 1.0]).unwrap();
        let p = l.at(2.0);
        let q = l.at(-1.0);
        assert!((m.dist(&p, &q) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn projection_is_one_lipschitz_and_isometric_on_lines() {
        let m = HeisModel::new(2).unwrap();
        let x = HeisElement::new(vec![Complex64::new(1.0, 0.0)], 0.5)
            .unwrap()
            .to_point();
        let y = HeisElement::new(vec![Complex64::new(0.0, 2.0)], -0.25)
            .unwrap()
            .to_point();
        let base_gap = vecn::dist(&m.project(&x).unwrap(), &m.project(&y).unwrap());
        assert!(base_gap <= m.dist(&x, &y) + 1e-15);
        let l = m.line_through(&x, &[1.0, 0.0]).unwrap();
        let a = l.at(0.7);
        let b = l.at(-0.9);
        let pa = m.project(&a).unwrap();
        let pb = m.project(&b).unwrap();
        assert!((vecn::dist(&pa, &pb) - m.dist(&a, &b)).abs() < 1e-12);
    }
}
