//! Exact-algebraic suites: group law, gauge metric, four-point scans.

use num_complex::Complex64;
use rand::Rng;

use super::samplers::{euclid_point, heis_elem, heis_point};
use super::{SuiteCtx, SuiteOutcome};
use crate::error::Result;
use crate::euclidean::{circle_through, euclidean_model};
use crate::heisenberg::{
    heis_commutator, heis_inverse, heis_mul, koranyi_dist_elems, koranyi_gauge, HeisElement,
    HeisModel,
};
use crate::metric::{cross_ratio, m_invert, metric_crt_agreement, ptolemy_scan, MetricEvaluator};
use crate::point::{ExtendedPoint, Quadruple};
use crate::triple::{classify_triple, PtolemyTag};

pub(super) fn group_law(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let m = ctx.k - 1;
    let n = ctx.scaled(10_000);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let a = heis_elem(&mut ctx.rng, m, 2.0);
        let b = heis_elem(&mut ctx.rng, m, 2.0);
        let c = heis_elem(&mut ctx.rng, m, 2.0);
        let left = heis_mul(&heis_mul(&a, &b)?, &c)?;
        let right = heis_mul(&a, &heis_mul(&b, &c)?)?;
        let mut dev = (left.h - right.h).abs();
        for (x, y) in left.z.iter().zip(&right.z) {
            dev = dev.max((x - y).norm());
        }
        worst = worst.max(dev);
        // Identity and inverse are exact.
        let e = HeisElement::identity(m);
        let back = heis_mul(&a, &heis_inverse(&a))?;
        worst = worst.max(back.h.abs());
        worst = worst.max(back.z.iter().map(|v| v.norm()).fold(0.0, f64::max));
        let through = heis_mul(&a, &e)?;
        worst = worst.max((through.h - a.h).abs());
    }
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn commutator_center(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let m = ctx.k - 1;
    let n = ctx.scaled(2_000);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let a = heis_elem(&mut ctx.rng, m, 2.0);
        let b = heis_elem(&mut ctx.rng, m, 2.0);
        let c = heis_commutator(&a, &b)?;
        // Commutators have no base component.
        worst = worst.max(c.z.iter().map(|v| v.norm()).fold(0.0, f64::max));
        // Every vertical element is a commutator of horizontal ones:
        // [(e1, 0), (i h e1, 0)] = (0, h).
        let h = ctx.rng.random_range(-2.0..2.0);
        let mut za = vec![Complex64::ZERO; m];
        za[0] = Complex64::ONE;
        let mut zb = vec![Complex64::ZERO; m];
        zb[0] = Complex64::new(0.0, h);
        let comm = heis_commutator(
            &HeisElement { z: za, h: 0.0 },
            &HeisElement { z: zb, h: 0.0 },
        )?;
        worst = worst.max((comm.h - h).abs());
        worst = worst.max(comm.z.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    // The canonical generator: [(e1, 0), (i e1, 0)] = (0, 1).
    let mut e1 = vec![Complex64::ZERO; m];
    e1[0] = Complex64::ONE;
    let mut ie1 = vec![Complex64::ZERO; m];
    ie1[0] = Complex64::I;
    let c = heis_commutator(
        &HeisElement { z: e1, h: 0.0 },
        &HeisElement { z: ie1, h: 0.0 },
    )?;
    let worst = worst.max((c.h - 1.0).abs());
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn gauge_metric(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let m = ctx.k - 1;
    let n = ctx.scaled(5_000);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let x = heis_elem(&mut ctx.rng, m, 2.0);
        let y = heis_elem(&mut ctx.rng, m, 2.0);
        let g = heis_elem(&mut ctx.rng, m, 2.0);
        let direct = koranyi_dist_elems(&x, &y);
        let quotient = koranyi_gauge(&heis_mul(&heis_inverse(&x), &y)?);
        let scale = direct.max(1.0);
        worst = worst.max((direct - quotient).abs() / scale);
        worst = worst.max((direct - koranyi_dist_elems(&y, &x)).abs() / scale);
        let translated = koranyi_dist_elems(&heis_mul(&g, &x)?, &heis_mul(&g, &y)?);
        worst = worst.max((translated - direct).abs() / scale);
    }
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn fiber_metric(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let m = ctx.k - 1;
    let n = ctx.scaled(5_000);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let a = heis_elem(&mut ctx.rng, m, 2.0);
        let h2 = ctx.rng.random_range(-2.0..2.0);
        let b = HeisElement {
            z: a.z.clone(),
            h: h2,
        };
        let d = koranyi_dist_elems(&a, &b);
        let expected = 2.0 * (a.h - h2).abs().sqrt();
        worst = worst.max((d - expected).abs());
    }
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn fiber_pythagoras(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let m = ctx.k - 1;
    let n = ctx.scaled(1_000);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let a = heis_elem(&mut ctx.rng, m, 2.0);
        let mut hs = [
            a.h,
            ctx.rng.random_range(-2.0..2.0),
            ctx.rng.random_range(-2.0..2.0),
        ];
        hs.sort_by(f64::total_cmp);
        let p = |h: f64| HeisElement {
            z: a.z.clone(),
            h,
        };
        let (x, y, z) = (p(hs[0]), p(hs[1]), p(hs[2]));
        let dxz = koranyi_dist_elems(&x, &z).powi(2);
        let dxy = koranyi_dist_elems(&x, &y).powi(2);
        let dyz = koranyi_dist_elems(&y, &z).powi(2);
        worst = worst.max((dxz - dxy - dyz).abs() / dxz.max(1e-300));
    }
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn triangle_inequality(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let m = ctx.k - 1;
    let n = ctx.scaled(100_000);
    let mut worst = 0.0_f64;
    let mut witness = None;
    for _ in 0..n {
        let x = heis_elem(&mut ctx.rng, m, 2.0);
        let y = heis_elem(&mut ctx.rng, m, 2.0);
        let z = heis_elem(&mut ctx.rng, m, 2.0);
        let dxz = koranyi_dist_elems(&x, &z);
        let slack = koranyi_dist_elems(&x, &y) + koranyi_dist_elems(&y, &z) - dxz;
        let rel = (-slack).max(0.0) / dxz.max(1e-12);
        if rel > worst {
            worst = rel;
            witness = Some(serde_json::json!({
                "x": x, "y": y, "z": z, "slack": slack,
            }));
        }
    }
    Ok(SuiteOutcome {
        worst,
        n,
        witness,
    })
}

pub(super) fn ptolemy_scan_euclidean(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = euclidean_model(2)?;
    let n = ctx.scaled(100_000);
    let mut sampler = |rng: &mut crate::rng::SeededRng| euclid_point(rng, 2, 3.0);
    let report = ptolemy_scan(model.metric(), &mut sampler, &mut ctx.rng, n, ctx.tol)?;
    Ok(SuiteOutcome::with_witness(
        (-report.min_slack).max(0.0),
        n,
        serde_json::to_value(&report).expect("serializable report"),
    ))
}

pub(super) fn ptolemy_scan_heisenberg(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let n = ctx.scaled(100_000);
    let mut sampler = |rng: &mut crate::rng::SeededRng| heis_point(rng, &model, 2.0);
    let report = ptolemy_scan(model.metric(), &mut sampler, &mut ctx.rng, n, ctx.tol)?;
    Ok(SuiteOutcome::with_witness(
        (-report.min_slack).max(0.0),
        n,
        serde_json::to_value(&report).expect("serializable report"),
    ))
}

pub(super) fn l1_violation(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let d = MetricEvaluator::from_finite("manhattan-2d", |a, b| {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    });
    let n = ctx.scaled(10_000);
    let mut sampler = |rng: &mut crate::rng::SeededRng| euclid_point(rng, 2, 2.0);
    let report = ptolemy_scan(&d, &mut sampler, &mut ctx.rng, n, 1e-12)?;
    // This suite passes when a genuine violation is found.
    let found = report.violations > 0 && report.min_slack < -1e-6;
    Ok(SuiteOutcome::with_witness(
        if found { 0.0 } else { 1.0 },
        n,
        serde_json::to_value(&report).expect("serializable report"),
    ))
}

pub(super) fn euclidean_circles(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = euclidean_model(2)?;
    let n = ctx.scaled(50);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let p = euclid_point(&mut ctx.rng, 2, 2.0);
        let q = euclid_point(&mut ctx.rng, 2, 2.0);
        let r = euclid_point(&mut ctx.rng, 2, 2.0);
        let Ok(circle) = circle_through(&p, &q, &r) else {
            continue;
        };
        let res = crate::metric::circle_residual(model.metric(), &circle.sample(10))?;
        worst = worst.max(res);
    }
    // The unit circle with eight equally spaced points.
    let pts: Vec<ExtendedPoint> = (0..8)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / 8.0;
            ExtendedPoint::Finite {
                coords: vec![t.cos(), t.sin()],
            }
        })
        .collect();
    worst = worst.max(crate::metric::circle_residual(model.metric(), &pts)?);
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn line_additivity(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let n = ctx.scaled(200);
    let mut worst = 0.0_f64;
    // Euclidean line closed up through the infinitely remote point.
    let e = euclidean_model(1)?;
    for _ in 0..n {
        let mut ts: Vec<f64> = (0..4).map(|_| ctx.rng.random_range(-3.0..3.0)).collect();
        ts.sort_by(f64::total_cmp);
        let mut pts: Vec<ExtendedPoint> = ts
            .iter()
            .map(|t| ExtendedPoint::Finite { coords: vec![*t] })
            .collect();
        pts.push(ExtendedPoint::Infinity);
        worst = worst.max(crate::metric::circle_residual(e.metric(), &pts)?);
    }
    // Horizontal lines of the Heisenberg model are geodesics as well.
    let m = HeisModel::new(ctx.k)?;
    let g = heis_elem(&mut ctx.rng, ctx.k - 1, 1.0);
    let dir = super::samplers::unit_dir(&mut ctx.rng, 2 * (ctx.k - 1));
    let line = crate::geometry::LineGeometry::line_through(&m, &g.to_point(), &dir)?;
    for _ in 0..n {
        let mut ts: Vec<f64> = (0..4).map(|_| ctx.rng.random_range(-3.0..3.0)).collect();
        ts.sort_by(f64::total_cmp);
        let mut pts: Vec<ExtendedPoint> = ts.iter().map(|t| line.at(*t)).collect();
        pts.push(ExtendedPoint::Infinity);
        worst = worst.max(crate::metric::circle_residual(m.metric(), &pts)?);
    }
    Ok(SuiteOutcome::new(worst, 2 * n))
}

pub(super) fn inversion_involution(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let center = heis_point(&mut ctx.rng, &model, 1.0);
    let inverted = m_invert(model.metric(), &center, 1.0)?;
    let back = m_invert(&inverted, &ExtendedPoint::Infinity, 1.0)?;
    let n = ctx.scaled(2_000);
    let mut worst = 0.0_f64;
    let mut quads: Vec<Quadruple> = Vec::new();
    for _ in 0..n {
        let x = heis_point(&mut ctx.rng, &model, 2.0);
        let y = heis_point(&mut ctx.rng, &model, 2.0);
        if x == y || x == center || y == center {
            continue;
        }
        let orig = model.metric().dist(&x, &y);
        worst = worst.max((back.dist(&x, &y) - orig).abs() / orig);
        if quads.len() < 300 {
            let a = heis_point(&mut ctx.rng, &model, 2.0);
            let b = heis_point(&mut ctx.rng, &model, 2.0);
            let q = Quadruple([x.clone(), y.clone(), a, b]);
            if q.is_admissible() && q.0.iter().all(|p| *p != center) {
                quads.push(q);
            }
        }
    }
    // The inverted metric shares all cross-ratio triples with the source.
    worst = worst.max(metric_crt_agreement(model.metric(), &inverted, &quads)?);
    // The inverted quadruple classification matches on a degenerate case:
    // a repeated pair stays on the middle-triangle boundary.
    let x = heis_point(&mut ctx.rng, &model, 1.0);
    let y = heis_point(&mut ctx.rng, &model, 1.0);
    let q = Quadruple([x.clone(), y.clone(), x, y]);
    let t = cross_ratio(&inverted, &q)?;
    if classify_triple(&t, 1e-12).tag != PtolemyTag::BoundaryDelta {
        worst = worst.max(1.0);
    }
    Ok(SuiteOutcome::new(worst, n))
}
