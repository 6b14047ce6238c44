//! Zigzag curves and the orthogonalization of a line against a frame.
//!
//! A zigzag follows a cyclic list of oriented line directions with step
//! lengths halved at every depth increment: at depth p the step along the
//! i-th direction is s_i / 2^{p-1}, always taken along the parallel line
//! through the current vertex. Busemann functions are affine along the
//! limit curve with coefficient beta = sum_i alpha_i s_i / sum_i s_i, and
//! for mutually orthogonal directions the limit moves away from the start
//! at speed sqrt(sum s_i^2) / sum s_i of the canonical parameter. The
//! construction here is the finite-depth approximation; convergence is
//! asserted by comparing consecutive depths instead of passing to a limit.

use crate::busemann::{slope_estimate, BusemannScheme};
use crate::error::{Error, Result};
use crate::geometry::{LineGeometry, ModelLine};
use crate::point::ExtendedPoint;

/// Data of a zigzag: start point, ordered oriented directions, step
/// lengths and the depth of the dyadic subdivision.
#[derive(Clone, Debug)]
pub struct ZigzagSpec {
    pub origin: ExtendedPoint,
    pub directions: Vec<Vec<f64>>,
    pub steps: Vec<f64>,
    pub depth: u32,
}

impl ZigzagSpec {
    pub fn validate(&self) -> Result<()> {
        if self.directions.is_empty() || self.directions.len() != self.steps.len() {
            return Err(Error::InvalidArgument(
                "need equally many directions and steps".into(),
            ));
        }
        if self.steps.iter().any(|s| *s < 0.0) || self.steps.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidArgument(
                "step lengths must be nonnegative with positive sum".into(),
            ));
        }
        if self.depth < 1 {
            return Err(Error::InvalidArgument("depth must be at least 1".into()));
        }
        Ok(())
    }
}

/// A finite-depth zigzag polyline with its canonical parameterization.
/// Vertex n sits at parameter `params[n]`; edges are geodesic segments of
/// the model, so evaluation between vertices is exact.
pub struct ZigzagCurve {
    pub params: Vec<f64>,
    pub vertices: Vec<ExtendedPoint>,
    /// Direction index used on the edge leaving vertex n.
    edge_dirs: Vec<usize>,
    directions: Vec<Vec<f64>>,
    /// Index of the origin vertex inside `vertices`.
    pub origin_index: usize,
}

impl ZigzagCurve {
    /// Evaluate at a canonical parameter inside the constructed span.
    pub fn at(&self, model: &impl LineGeometry, t: f64) -> Result<ExtendedPoint> {
        let n = self.params.len();
        if t < self.params[0] || t > self.params[n - 1] {
            return Err(Error::InvalidArgument(format!(
                "parameter {t} outside the constructed span"
            )));
        }
        let idx = match self
            .params
            .binary_search_by(|p| p.total_cmp(&t))
        {
            Ok(i) => return Ok(self.vertices[i].clone()),
            Err(i) => i - 1,
        };
        let line = model.line_through(
            &self.vertices[idx],
            &self.directions[self.edge_dirs[idx]],
        )?;
        Ok(line.at(t - self.params[idx]))
    }

    pub fn endpoint_forward(&self) -> (&ExtendedPoint, f64) {
        (
            &self.vertices[self.vertices.len() - 1],
            self.params[self.params.len() - 1],
        )
    }
}

/// Construct the depth-p zigzag covering canonical parameters
/// [-t_span, t_span].
pub fn zigzag(
    model: &impl LineGeometry,
    spec: &ZigzagSpec,
    t_span: f64,
) -> Result<ZigzagCurve> {
    spec.validate()?;
    let k = spec.directions.len();
    let scale = 1.0 / (1u64 << (spec.depth - 1)) as f64;

    // Forward sweep: directions in order 1..k, repeating.
    let mut fwd_params = vec![0.0_f64];
    let mut fwd_vertices = vec![spec.origin.clone()];
    let mut fwd_dirs: Vec<usize> = Vec::new();
    let mut t = 0.0;
    let mut i = 0usize;
    while t < t_span {
        let step = spec.steps[i % k] * scale;
        let v = fwd_vertices.last().unwrap();
        let line = model.line_through(v, &spec.directions[i % k])?;
        fwd_dirs.push(i % k);
        fwd_vertices.push(line.at(step));
        t += step;
        fwd_params.push(t);
        i += 1;
    }

    // Backward sweep: reversed orientations, reversed cyclic order,
    // starting with the last direction.
    let mut bwd_params: Vec<f64> = Vec::new();
    let mut bwd_vertices: Vec<ExtendedPoint> = Vec::new();
    let mut bwd_dirs: Vec<usize> = Vec::new();
    let mut t = 0.0;
    let mut cur = spec.origin.clone();
    let mut j = 0usize;
    while t > -t_span {
        let idx = (k - 1 + k - (j % k)) % k; // k-1, k-2, ..., 0, k-1, ...
        let step = spec.steps[idx] * scale;
        let rev_dir: Vec<f64> = spec.directions[idx].iter().map(|x| -x).collect();
        let line = model.line_through(&cur, &rev_dir)?;
        cur = line.at(step);
        t -= step;
        bwd_params.push(t);
        bwd_vertices.push(cur.clone());
        bwd_dirs.push(idx);
        j += 1;
    }

    // Assemble in increasing parameter order. The edge leaving a backward
    // vertex (towards the origin) uses the direction that was walked.
    let mut params: Vec<f64> = bwd_params.iter().rev().cloned().collect();
    let mut vertices: Vec<ExtendedPoint> = bwd_vertices.iter().rev().cloned().collect();
    let mut edge_dirs: Vec<usize> = bwd_dirs.iter().rev().cloned().collect();
    let origin_index = params.len();
    params.extend(fwd_params);
    vertices.extend(fwd_vertices);
    edge_dirs.extend(fwd_dirs);

    Ok(ZigzagCurve {
        params,
        vertices,
        edge_dirs,
        directions: spec.directions.clone(),
        origin_index,
    })
}

/// Result of orthogonalizing a line against a mutually orthogonal frame.
#[derive(Clone, Debug)]
pub struct Orthogonalization {
    /// Step lengths (alpha_1, ..., alpha_m, 1) / (1 + alpha).
    pub steps: Vec<f64>,
    /// Nonnegative slopes of the line against the (re)oriented frame.
    pub alphas: Vec<f64>,
    pub alpha_sq_sum: f64,
    /// Degenerate iff sum of squared slopes is 1 within tolerance: then
    /// the zigzag collapses and produces no new line.
    pub degenerate: bool,
    /// Frame directions, re-oriented so every slope is nonnegative,
    /// followed by the direction of the line itself.
    pub oriented_dirs: Vec<Vec<f64>>,
}

/// Orthogonalization step lengths for the zigzag built from a mutually
/// orthogonal frame and one extra line.
pub fn orthogonalize(
    model: &impl LineGeometry,
    frame: &[ModelLine],
    l: &ModelLine,
    scheme: &BusemannScheme,
    tol: f64,
) -> Result<Orthogonalization> {
    if frame.is_empty() {
        return Err(Error::InvalidArgument("empty frame".into()));
    }
    // Frame must be mutually orthogonal.
    for i in 0..frame.len() {
        for j in (i + 1)..frame.len() {
            let fit = slope_estimate(model, &frame[i], &frame[j], scheme, 1.0, 21, 1e-4)
                .map_err(|e| Error::SlopeEstimationFailed(e.to_string()))?;
            if fit.slope.abs() > 100.0 * tol {
                return Err(Error::SlopeEstimationFailed(format!(
                    "frame lines {i} and {j} are not orthogonal: slope {}",
                    fit.slope
                )));
            }
        }
    }
    let mut alphas = Vec::with_capacity(frame.len());
    let mut oriented_dirs = Vec::with_capacity(frame.len() + 1);
    for line in frame {
        let fit = slope_estimate(model, l, line, scheme, 1.0, 21, 1e-4)
            .map_err(|e| Error::SlopeEstimationFailed(e.to_string()))?;
        let (alpha, dir) = if fit.slope < 0.0 {
            // Flip the frame line so the slope is nonnegative. The slope
            // against l is computed with l's own orientation, so flipping
            // the frame member negates it.
            (-fit.slope, line.dir().iter().map(|x| -x).collect())
        } else {
            (fit.slope, line.dir().to_vec())
        };
        alphas.push(alpha);
        oriented_dirs.push(dir);
    }
    oriented_dirs.push(l.dir().to_vec());
    let alpha: f64 = alphas.iter().sum();
    let mut steps: Vec<f64> = alphas.iter().map(|a| a / (1.0 + alpha)).collect();
    steps.push(1.0 / (1.0 + alpha));
    let alpha_sq_sum: f64 = alphas.iter().map(|a| a * a).sum();
    Ok(Orthogonalization {
        steps,
        alphas: alphas.clone(),
        alpha_sq_sum,
        degenerate: (alpha_sq_sum - 1.0).abs() <= tol,
        oriented_dirs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::HeisModel;

    #[test]
    fn single_direction_zigzag_is_the_line() {
        let m = HeisModel::new(2).unwrap();
        let o = m.origin().to_point();
        let spec = ZigzagSpec {
            origin: o.clone(),
            directions: vec![vec![1.0, 0.0]],
            steps: vec![1.0],
            depth: 5,
        };
        let z = zigzag(&m, &spec, 3.0).unwrap();
        let line = m.line_through(&o, &[1.0, 0.0]).unwrap();
        for t in [-2.5, -1.0, 0.0, 0.7, 2.9] {
            let p = z.at(&m, t).unwrap();
            let q = line.at(t);
            assert!(m.dist(&p, &q) < 1e-12, "mismatch at {t}");
        }
    }

    #[test]
    fn orthogonal_frame_endpoint_speed() {
        let m = HeisModel::new(2).unwrap();
        let o = m.origin().to_point();
        let spec = ZigzagSpec {
            origin: o.clone(),
            directions: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            steps: vec![1.0, 1.0],
            depth: 12,
        };
        let total = 2.0;
        let z = zigzag(&m, &spec, total).unwrap();
        let end = z.at(&m, total).unwrap();
        let speed = m.dist(&o, &end) / total;
        let expected = (2.0_f64).sqrt() / 2.0;
        assert!(
            (speed - expected).abs() < 1e-3,
            "speed {speed} vs {expected}"
        );
    }

    #[test]
    fn orthogonalization_of_a_diagonal_line() {
        let m = HeisModel::new(2).unwrap();
        let o = m.origin().to_point();
        let scheme = BusemannScheme::default();
        let frame = vec![
            m.line_through(&o, &[1.0, 0.0]).unwrap(),
            m.line_through(&o, &[0.0, 1.0]).unwrap(),
        ];
        let theta: f64 = 0.83;
        let l = m
            .line_through(&o, &[theta.cos(), theta.sin()])
            .unwrap();
        let orth = orthogonalize(&m, &frame, &l, &scheme, 1e-3).unwrap();
        // Against a maximal frame the squared slopes sum to one and the
        // construction degenerates.
        assert!(
            (orth.alpha_sq_sum - 1.0).abs() < 1e-3,
            "sum {}",
            orth.alpha_sq_sum
        );
        assert!(orth.degenerate);
        // Dropping one frame vector leaves a nondegenerate zigzag.
        let partial = orthogonalize(&m, &frame[..1], &l, &scheme, 1e-3).unwrap();
        assert!(!partial.degenerate, "sum {}", partial.alpha_sq_sum);
    }
}
