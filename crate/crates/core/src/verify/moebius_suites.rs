//! Cross-ratio invariance of the model maps, the inversion/metric
//! inversion duality and the quartic distance law.

use rand::Rng;

use super::samplers::{euclid_point, heis_elem, heis_point, quadruple_of, random_unitary};
use super::{SuiteCtx, SuiteOutcome};
use crate::error::Result;
use crate::euclidean::{chordal_metric, euclid_inversion, euclidean_model};
use crate::heisenberg::{
    conj_flip, dilation, koranyi_gauge, koranyi_inversion_for, koranyi_inversion_radius,
    left_translation, space_inversion, unitary_map, HeisElement, HeisModel,
};
use crate::lifting::{d_law_residual, dist_components};
use crate::metric::{
    m_invert, metric_crt_agreement, moebius_residual, pullback, MoebiusMapHandle,
};
use crate::point::{ExtendedPoint, Quadruple};

fn heis_quads(ctx: &mut SuiteCtx, model: &HeisModel, count: u64) -> Vec<Quadruple> {
    (0..count)
        .map(|_| {
            let model = model.clone();
            quadruple_of(&mut ctx.rng, move |rng| heis_point(rng, &model, 2.0))
        })
        .collect()
}

fn residual_of_map(
    ctx: &mut SuiteCtx,
    model: &HeisModel,
    map: &MoebiusMapHandle,
    count: u64,
) -> Result<SuiteOutcome> {
    let quads = heis_quads(ctx, model, count);
    let worst = moebius_residual(model.metric(), map, &quads)?;
    Ok(SuiteOutcome::new(worst, count))
}

pub(super) fn translations(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let g = heis_elem(&mut ctx.rng, ctx.k - 1, 1.5);
    let map = left_translation(&g);
    let n = ctx.scaled(1_000);
    let mut out = residual_of_map(ctx, &model, &map, n)?;
    // Left invariance makes the pullback literally the metric itself.
    let pulled = pullback(model.metric(), &map);
    for _ in 0..200 {
        let x = heis_point(&mut ctx.rng, &model, 2.0);
        let y = heis_point(&mut ctx.rng, &model, 2.0);
        let d = model.metric().dist(&x, &y);
        if d > 1e-9 {
            out.worst = out.worst.max((pulled.dist(&x, &y) - d).abs() / d);
        }
    }
    Ok(out)
}

pub(super) fn dilations(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let lambda = ctx.rng.random_range(0.4..2.5);
    let map = dilation(lambda)?;
    let n = ctx.scaled(1_000);
    residual_of_map(ctx, &model, &map, n)
}

pub(super) fn unitaries(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let u = random_unitary(&mut ctx.rng, ctx.k - 1);
    let map = unitary_map(u)?;
    let n = ctx.scaled(1_000);
    residual_of_map(ctx, &model, &map, n)
}

pub(super) fn conj_flip_suite(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let map = conj_flip();
    let n = ctx.scaled(1_000);
    let mut out = residual_of_map(ctx, &model, &map, n)?;
    for _ in 0..ctx.scaled(1_000) {
        let x = heis_point(&mut ctx.rng, &model, 2.0);
        let y = heis_point(&mut ctx.rng, &model, 2.0);
        // Involution, exactly.
        if map.apply(&map.apply(&x)) != x {
            out.worst = out.worst.max(1.0);
        }
        // Isometry.
        let d = model.metric().dist(&x, &y);
        if d > 1e-9 {
            let moved = model.metric().dist(&map.apply(&x), &map.apply(&y));
            out.worst = out.worst.max((moved - d).abs() / d);
        }
    }
    // The real horizontal line through the origin is fixed pointwise.
    let origin = model.origin().to_point();
    let line = crate::geometry::LineGeometry::line_through(
        &model,
        &origin,
        &{
            let mut dir = vec![0.0; 2 * (ctx.k - 1)];
            dir[0] = 1.0;
            dir
        },
    )?;
    for i in 0..20 {
        let p = line.at(-2.0 + 0.2 * i as f64);
        if map.apply(&p) != p {
            out.worst = out.worst.max(1.0);
        }
    }
    Ok(out)
}

pub(super) fn koranyi_inversion_suite(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let map = koranyi_inversion_for(ctx.k - 1);
    let n = ctx.scaled(1_000);
    residual_of_map(ctx, &model, &map, n)
}

pub(super) fn space_inversion_suite(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let w = heis_point(&mut ctx.rng, &model, 1.0);
    let wp = heis_point(&mut ctx.rng, &model, 1.0);
    let map = space_inversion(&model, &w, &wp, 1.3)?;
    let n = ctx.scaled(1_000);
    let mut out = residual_of_map(ctx, &model, &map, n)?;
    // Structural gates, each with its own honest tolerance: the quartic
    // gauge turns coordinate rounding through the composite chain into a
    // fourth-root noise floor, so near-zero distances are compared against
    // 1e-5 rather than folded into the cross-ratio residual.
    let near = |a: &ExtendedPoint, b: &ExtendedPoint| -> f64 {
        model.metric().dist(a, b)
    };
    let mut gate_failures: Vec<&str> = Vec::new();
    if near(&map.apply(&w), &wp) > 1e-7 || near(&map.apply(&wp), &w) > 1e-7 {
        gate_failures.push("pole swap");
    }
    let mut fixed_points = 0u32;
    let mut worst_involution = 0.0_f64;
    for _ in 0..ctx.scaled(2_000) {
        let x = heis_point(&mut ctx.rng, &model, 2.0);
        let image = map.apply(&x);
        if image == x {
            fixed_points += 1;
        }
        let back = map.apply(&image);
        let scale = koranyi_gauge(&model.elem(&x)?).max(1.0);
        worst_involution = worst_involution.max(near(&back, &x) / scale);
    }
    if worst_involution > 1e-5 {
        gate_failures.push("involution");
    }
    if fixed_points > 0 {
        gate_failures.push("fixed point found");
    }
    if !gate_failures.is_empty() {
        out.worst = out.worst.max(1.0);
        out.witness = Some(serde_json::json!({
            "gates": gate_failures,
            "fixed_points": fixed_points,
            "involution_defect": worst_involution,
        }));
    }
    Ok(out)
}

pub(super) fn inversion_pullback(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let iota = koranyi_inversion_for(ctx.k - 1);
    let pulled = pullback(model.metric(), &iota);
    let origin = model.origin().to_point();
    let mi = m_invert(model.metric(), &origin, 1.0)?;
    let n = ctx.scaled(10_000);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let x = heis_point(&mut ctx.rng, &model, 2.0);
        let y = heis_point(&mut ctx.rng, &model, 2.0);
        if x == y || x == origin || y == origin {
            continue;
        }
        let a = pulled.dist(&x, &y);
        let b = mi.dist(&x, &y);
        worst = worst.max((a - b).abs() / b.max(1e-12));
    }
    // The classical inversion against the plane model, same contract.
    let e = euclidean_model(2)?;
    let center = euclid_point(&mut ctx.rng, 2, 1.0);
    let r = ctx.rng.random_range(0.5..2.0);
    let inv = euclid_inversion(&center, r)?;
    let pulled_e = pullback(e.metric(), &inv);
    let mi_e = m_invert(e.metric(), &center, r)?;
    for _ in 0..ctx.scaled(1_000) {
        let x = euclid_point(&mut ctx.rng, 2, 2.0);
        let y = euclid_point(&mut ctx.rng, 2, 2.0);
        if x == y || x == center || y == center {
            continue;
        }
        let a = pulled_e.dist(&x, &y);
        let b = mi_e.dist(&x, &y);
        worst = worst.max((a - b).abs() / b.max(1e-12));
    }
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn sphere_mapping(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let r = 1.0;
    let iota = koranyi_inversion_radius(ctx.k - 1, r)?;
    let n = ctx.scaled(1_000);
    let mut worst = 0.0_f64;
    for i in 0..n {
        // Points on the gauge sphere of radius r', pushed through the
        // inversion; the image radius must be r^2 / r'.
        let r_prime = if i == 0 {
            2.0
        } else {
            ctx.rng.random_range(0.3..3.0)
        };
        let raw = heis_elem(&mut ctx.rng, ctx.k - 1, 1.0);
        let gauge = koranyi_gauge(&raw);
        if gauge < 1e-3 {
            continue;
        }
        let s = r_prime / gauge;
        let on_sphere = HeisElement {
            z: raw.z.iter().map(|v| v * s).collect(),
            h: raw.h * s * s,
        };
        let image = iota.apply(&on_sphere.to_point());
        let image_gauge = koranyi_gauge(&model.elem(&image)?);
        let expected = r * r / r_prime;
        worst = worst.max((image_gauge - expected).abs() / expected);
    }
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn invariant_sphere(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let r = ctx.rng.random_range(0.6..1.8);
    let iota = koranyi_inversion_radius(ctx.k - 1, r)?;
    let n = ctx.scaled(500);
    let mut worst = 0.0_f64;
    let mut moved_all_others = true;
    for i in 0..n {
        let raw = heis_elem(&mut ctx.rng, ctx.k - 1, 1.0);
        let gauge = koranyi_gauge(&raw);
        if gauge < 1e-3 {
            continue;
        }
        let scale_to = |radius: f64| -> HeisElement {
            let s = radius / gauge;
            HeisElement {
                z: raw.z.iter().map(|v| v * s).collect(),
                h: raw.h * s * s,
            }
        };
        // On the calibration sphere the gauge is preserved.
        let on = scale_to(r).to_point();
        let image_gauge = koranyi_gauge(&model.elem(&iota.apply(&on))?);
        worst = worst.max((image_gauge - r).abs() / r);
        // Other spheres must move.
        let r_other = if i % 2 == 0 { r * 1.5 } else { r / 1.7 };
        let off = scale_to(r_other).to_point();
        let moved = koranyi_gauge(&model.elem(&iota.apply(&off))?);
        if (moved - r_other).abs() / r_other < 0.05 {
            moved_all_others = false;
        }
    }
    if !moved_all_others {
        worst = worst.max(1.0);
    }
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn chordal_equivalence(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let e = euclidean_model(2)?;
    let dc = chordal_metric(2);
    let n = ctx.scaled(1_000);
    let quads: Vec<Quadruple> = (0..n)
        .map(|_| quadruple_of(&mut ctx.rng, |rng| euclid_point(rng, 2, 3.0)))
        .collect();
    let worst = metric_crt_agreement(e.metric(), &dc, &quads)?;
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn quartic_distance_law(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let n = ctx.scaled(10_000);
    let mut worst = 0.0_f64;
    for k in [2usize, 3] {
        let model = HeisModel::new(k)?;
        let pairs: Vec<(ExtendedPoint, ExtendedPoint)> = (0..n / 2)
            .map(|_| {
                (
                    heis_point(&mut ctx.rng, &model, 2.0),
                    heis_point(&mut ctx.rng, &model, 2.0),
                )
            })
            .collect();
        worst = worst.max(d_law_residual(&model, &pairs)?);
    }
    Ok(SuiteOutcome::new(worst, n))
}

pub(super) fn distance_law_homogeneity(ctx: &mut SuiteCtx) -> Result<SuiteOutcome> {
    let model = HeisModel::new(ctx.k)?;
    let lambda = ctx.rng.random_range(0.5..2.0);
    let map = dilation(lambda)?;
    let n = ctx.scaled(2_000);
    let mut worst = 0.0_f64;
    for _ in 0..n {
        let x = heis_point(&mut ctx.rng, &model, 2.0);
        let y = heis_point(&mut ctx.rng, &model, 2.0);
        if x == y {
            continue;
        }
        let (a, b) = dist_components(&model, &x, &y)?;
        let (a2, b2) = dist_components(&model, &map.apply(&x), &map.apply(&y))?;
        let d = model.metric().dist(&x, &y);
        let d2 = model.metric().dist(&map.apply(&x), &map.apply(&y));
        let scale = d.max(1e-12);
        worst = worst.max((a2 - lambda * a).abs() / scale);
        worst = worst.max((b2 - lambda * b).abs() / scale);
        worst = worst.max((d2 - lambda * d).abs() / (lambda * scale));
    }
    Ok(SuiteOutcome::new(worst, n))
}
