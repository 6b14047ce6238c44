//! Busemann functions, the distance-function duality and slopes of lines.
//!
//! The Busemann function of an oriented unit-speed line c through the
//! point c(0) is b(x) = lim_{t -> inf} (d(x, c(t)) - t). On both bundled
//! models the difference admits an expansion in powers of 1/t, so the
//! limit is taken by polynomial extrapolation in 1/t over a geometric
//! ladder of evaluation parameters (Neville's scheme). The error estimate
//! is the difference between the last two extrapolation orders, and a
//! value whose estimate exceeds ten times the target tolerance is
//! reported as non-convergent rather than returned silently.

use crate::error::{Error, Result};
use crate::geometry::{LineGeometry, ModelLine};
use crate::metric::m_invert;
use crate::point::ExtendedPoint;

/// Evaluation schedule for Busemann limits.
#[derive(Clone, Debug)]
pub struct BusemannScheme {
    /// Strictly increasing evaluation parameters, at least three.
    pub t_values: Vec<f64>,
    /// Extrapolation order (number of Neville stages to apply).
    pub extrapolation: usize,
    /// Target error for the limit.
    pub tol: f64,
}

impl Default for BusemannScheme {
    fn default() -> Self {
        BusemannScheme {
            t_values: vec![1.0e3, 2.0e3, 4.0e3],
            extrapolation: 2,
            tol: 1.0e-6,
        }
    }
}

impl BusemannScheme {
    pub fn validate(&self) -> Result<()> {
        if self.t_values.len() < 3 {
            return Err(Error::InvalidArgument(
                "scheme needs at least three evaluation parameters".into(),
            ));
        }
        if self.t_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "evaluation parameters must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// An extrapolated limit with its error estimate.
#[derive(Clone, Copy, Debug)]
pub struct Extrapolated {
    pub value: f64,
    pub err_est: f64,
}

/// Neville extrapolation of f(u) to u = 0 given samples at the nodes
/// `us`. Returns the value and the difference between the last two
/// polynomial orders as the error estimate.
pub fn neville_to_zero(us: &[f64], fs: &[f64], order: usize) -> Extrapolated {
    let n = us.len();
    let mut tableau = fs.to_vec();
    let mut last = tableau[n - 1];
    let mut prev = last;
    let stages = order.min(n - 1);
    for j in 1..=stages {
        for i in (j..n).rev() {
            // Polynomial through nodes i-j..=i evaluated at zero.
            tableau[i] = (us[i - j] * tableau[i] - us[i] * tableau[i - 1]) / (us[i - j] - us[i]);
        }
        prev = last;
        last = tableau[n - 1];
    }
    Extrapolated {
        value: last,
        err_est: (last - prev).abs(),
    }
}

/// The Busemann function of the oriented line at `x`, normalized so that
/// it vanishes at the line's base point.
pub fn busemann(
    model: &impl LineGeometry,
    line: &ModelLine,
    x: &ExtendedPoint,
    scheme: &BusemannScheme,
) -> Result<Extrapolated> {
    scheme.validate()?;
    let us: Vec<f64> = scheme.t_values.iter().map(|t| 1.0 / t).collect();
    let fs: Vec<f64> = scheme
        .t_values
        .iter()
        .map(|&t| model.dist(x, &line.at(t)) - t)
        .collect();
    if fs.iter().any(|v| !v.is_finite()) {
        return Err(Error::MetricDomain(
            "Busemann evaluation hit a non-finite distance".into(),
        ));
    }
    let ex = neville_to_zero(&us, &fs, scheme.extrapolation);
    if ex.err_est > 10.0 * scheme.tol {
        return Err(Error::NonConvergent {
            estimate: ex.value,
            err_est: ex.err_est,
            tol: scheme.tol,
        });
    }
    Ok(ex)
}

/// Max of |b+ + b-| over the samples, for the opposite Busemann functions
/// of the line, both normalized at the line's base point. Zero in a
/// Busemann-flat space.
pub fn busemann_flat_residual(
    model: &impl LineGeometry,
    line: &ModelLine,
    samples: &[ExtendedPoint],
    scheme: &BusemannScheme,
) -> Result<f64> {
    let reversed = line.reversed();
    let mut worst = 0.0_f64;
    for x in samples {
        let plus = busemann(model, line, x, scheme)?.value;
        let minus = busemann(model, &reversed, x, scheme)?.value;
        worst = worst.max((plus + minus).abs());
    }
    Ok(worst)
}

/// Residual of the duality between the Busemann function of a line and the
/// logarithmic derivative of the inverted distance along it.
///
/// For the line c through omega' = c(0) and the metric inversion d' of the
/// model metric at omega', the circle c closed up through the infinitely
/// remote point becomes a line of d' with unit-speed parameterization
/// u -> c(1/u) (and u = 0 at the old infinitely remote point). The duality
/// states b(x) = d/du ln d'(x, c(1/u)) at u = 0; the derivative is taken
/// by central differences extrapolated over a step-halving ladder.
pub fn duality_residual(
    model: &impl LineGeometry,
    line: &ModelLine,
    x: &ExtendedPoint,
    scheme: &BusemannScheme,
    fd_step: f64,
) -> Result<f64> {
    if x == line.base() || x.is_infinite() {
        return Err(Error::InvalidArgument(
            "duality residual needs a point away from both poles".into(),
        ));
    }
    let d_prime = m_invert(model.metric(), line.base(), 1.0)?;
    let g = |u: f64| -> f64 {
        let p = if u == 0.0 {
            ExtendedPoint::Infinity
        } else {
            line.at(1.0 / u)
        };
        d_prime.dist(x, &p).ln()
    };
    // Central differences at steps fd_step / 2^j, extrapolated in step^2.
    let mut us = Vec::new();
    let mut fs = Vec::new();
    for j in 0..3 {
        let e = fd_step / (1 << j) as f64;
        us.push(e * e);
        fs.push((g(e) - g(-e)) / (2.0 * e));
    }
    let derivative = neville_to_zero(&us, &fs, 2);
    let b_plus = busemann(model, line, x, scheme)?;
    Ok((b_plus.value - derivative.value).abs())
}

/// Affine fit of the Busemann function of `l` along `l_prime`.
#[derive(Clone, Copy, Debug)]
pub struct SlopeFit {
    /// The affine coefficient; in [-1, 1] up to numerical noise.
    pub slope: f64,
    pub offset: f64,
    /// Max deviation of the data from the fitted affine function.
    pub affinity_residual: f64,
}

/// Least-squares affine coefficient of t -> b_l(c'(t)) over a symmetric
/// window, with the max deviation from affinity reported. Errors with
/// `NonAffine` when the deviation exceeds `affine_tol`.
pub fn slope_estimate(
    model: &impl LineGeometry,
    l_prime: &ModelLine,
    l: &ModelLine,
    scheme: &BusemannScheme,
    window: f64,
    n_samples: usize,
    affine_tol: f64,
) -> Result<SlopeFit> {
    if n_samples < 3 {
        return Err(Error::SlopeEstimationFailed(
            "need at least three samples".into(),
        ));
    }
    let mut ts = Vec::with_capacity(n_samples);
    let mut bs = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let t = -window + 2.0 * window * i as f64 / (n_samples - 1) as f64;
        let x = l_prime.at(t);
        let b = busemann(model, l, &x, scheme)
            .map_err(|e| Error::SlopeEstimationFailed(e.to_string()))?;
        ts.push(t);
        bs.push(b.value);
    }
    let n = n_samples as f64;
    let st: f64 = ts.iter().sum();
    let sb: f64 = bs.iter().sum();
    let stt: f64 = ts.iter().map(|t| t * t).sum();
    let stb: f64 = ts.iter().zip(&bs).map(|(t, b)| t * b).sum();
    let denom = n * stt - st * st;
    if denom.abs() < 1e-30 {
        return Err(Error::SlopeEstimationFailed("degenerate window".into()));
    }
    let slope = (n * stb - st * sb) / denom;
    let offset = (sb - slope * st) / n;
    let affinity_residual = ts
        .iter()
        .zip(&bs)
        .map(|(t, b)| (b - (slope * t + offset)).abs())
        .fold(0.0_f64, f64::max);
    if affinity_residual > affine_tol {
        return Err(Error::NonAffine(affinity_residual));
    }
    Ok(SlopeFit {
        slope,
        offset,
        affinity_residual,
    })
}

/// |slope(l', l) - slope(l, l')|, two independent fits.
pub fn slope_symmetry_residual(
    model: &impl LineGeometry,
    l: &ModelLine,
    l_prime: &ModelLine,
    scheme: &BusemannScheme,
    affine_tol: f64,
) -> Result<f64> {
    let a = slope_estimate(model, l_prime, l, scheme, 1.0, 21, affine_tol)?;
    let b = slope_estimate(model, l, l_prime, scheme, 1.0, 21, affine_tol)?;
    Ok((a.slope - b.slope).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclidean::euclidean_model;
    use crate::heisenberg::{HeisElement, HeisModel};
    use crate::point::pt;
    use crate::vecn;
    use num_complex::Complex64;

    fn heis_point(re: f64, im: f64, h: f64) -> ExtendedPoint {
        HeisElement::new(vec![Complex64::new(re, im)], h)
            .unwrap()
            .to_point()
    }

    #[test]
    fn euclidean_busemann_is_linear() {
        let m = euclidean_model(2).unwrap();
        let dir = [0.6, 0.8];
        let line = m.line_through(&pt(&[0.0, 0.0]), &dir).unwrap();
        let scheme = BusemannScheme::default();
        for x in [pt(&[1.0, 2.0]), pt(&[-0.5, 0.3]), pt(&[3.0, -4.0])] {
            let b = busemann(&m, &line, &x, &scheme).unwrap();
            let expected = -vecn::dot(x.coords().unwrap(), &dir);
            assert!(
                (b.value - expected).abs() < 1e-8,
                "{} vs {expected}",
                b.value
            );
        }
    }

    #[test]
    fn heisenberg_busemann_closed_form() {
        // Along the real horizontal line through the origin the Busemann
        // function is minus the real part of the Hermitian pairing with
        // the direction.
        let m = HeisModel::new(2).unwrap();
        let line = m
            .line_through(&m.origin().to_point(), &[1.0, 0.0])
            .unwrap();
        let scheme = BusemannScheme::default();
        let x = heis_point(0.7, -1.3, 0.4);
        let b = busemann(&m, &line, &x, &scheme).unwrap();
        assert!((b.value + 0.7).abs() < 1e-6, "{}", b.value);
        // On the line itself at parameter t0 > 0 the value is -t0.
        let on = line.at(1.4);
        let b = busemann(&m, &line, &on, &scheme).unwrap();
        assert!((b.value + 1.4).abs() < 1e-9, "{}", b.value);
    }

    #[test]
    fn flatness_residual_is_small() {
        let m = HeisModel::new(2).unwrap();
        let line = m
            .line_through(&m.origin().to_point(), &[1.0, 0.0])
            .unwrap();
        let scheme = BusemannScheme::default();
        let samples = vec![
            heis_point(0.3, 0.9, -0.2),
            heis_point(-1.1, 0.2, 0.5),
            heis_point(0.0, -0.7, 0.1),
        ];
        let r = busemann_flat_residual(&m, &line, &samples, &scheme).unwrap();
        assert!(r < 1e-5, "residual {r}");
    }

    #[test]
    fn duality_residual_euclidean_and_heisenberg() {
        let e = euclidean_model(2).unwrap();
        let line = e.line_through(&pt(&[0.0, 0.0]), &[1.0, 0.0]).unwrap();
        let scheme = BusemannScheme::default();
        let r = duality_residual(&e, &line, &pt(&[0.4, 1.2]), &scheme, 1e-2).unwrap();
        assert!(r < 1e-6, "euclidean residual {r}");

        let m = HeisModel::new(2).unwrap();
        let line = m
            .line_through(&m.origin().to_point(), &[1.0, 0.0])
            .unwrap();
        let r = duality_residual(&m, &line, &heis_point(0.5, 0.8, -0.3), &scheme, 1e-2).unwrap();
        assert!(r < 1e-4, "heisenberg residual {r}");
    }

    #[test]
    fn slope_self_and_angle_law() {
        let m = HeisModel::new(2).unwrap();
        let scheme = BusemannScheme::default();
        let o = m.origin().to_point();
        let l = m.line_through(&o, &[1.0, 0.0]).unwrap();
        let fit = slope_estimate(&m, &l, &l, &scheme, 1.0, 21, 1e-5).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-6, "slope {}", fit.slope);
        // Direction at angle theta has slope -cos(theta) against the real
        // axis; at pi / 2 the lines are orthogonal.
        for theta in [0.4, std::f64::consts::FRAC_PI_2, 2.2] {
            let lp = m
                .line_through(&o, &[theta.cos(), theta.sin()])
                .unwrap();
            let fit = slope_estimate(&m, &lp, &l, &scheme, 1.0, 21, 1e-5).unwrap();
            assert!(
                (fit.slope + theta.cos()).abs() < 1e-4,
                "theta={theta}: slope {}",
                fit.slope
            );
        }
    }

    #[test]
    fn slope_symmetry() {
        let m = HeisModel::new(2).unwrap();
        let scheme = BusemannScheme::default();
        let l = m
            .line_through(&heis_point(0.2, -0.1, 0.3), &[1.0, 0.0])
            .unwrap();
        let lp = m
            .line_through(&heis_point(-0.4, 0.6, -0.2), &[0.28, 0.96])
            .unwrap();
        let r = slope_symmetry_residual(&m, &l, &lp, &scheme, 1e-5).unwrap();
        assert!(r < 1e-3, "symmetry residual {r}");
    }
}
