//! Suite registry: every checkable identity of the toolkit bound to a
//! seeded, tolerance-configured numerical experiment with a
//! machine-readable report.
//!
//! Suites are grouped by the numerical scheme behind them: exact algebraic
//! identities run at 1e-12, closed-form numerics at 1e-6..1e-9, and
//! limit-based quantities (Busemann functions, slopes, zigzag and tangent
//! limits) at 1e-3..1e-5, so each tolerance reflects an honest error
//! budget. Negative suites, which pass only when an expected violation is
//! found, are first class and keep the positive ones from passing
//! vacuously. Each suite draws from an RNG stream derived from the pair
//! (seed, tag), so reports are independent of execution order and
//! identical for identical configurations.

mod algebra;
mod samplers;
mod busemann_suites;
mod circle_suites;
mod lifting_suites;
mod moebius_suites;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, SeededRng};

/// Configuration shared by all suites. Reports are a pure function of it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Complex dimension of the Heisenberg model under test.
    pub k: usize,
    /// Global sample budget; suites scale their draw counts by
    /// `samples / 100_000`.
    pub samples: u64,
    /// Zigzag subdivision depth.
    pub depth: u32,
    /// Per-tag tolerance overrides.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 17,
            k: 2,
            samples: 100_000,
            depth: 12,
            tolerances: BTreeMap::new(),
        }
    }
}

/// Per-suite report. `pass` holds iff `worst_residual <= tolerance` as
/// configured for the tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub tag: String,
    pub pass: bool,
    pub worst_residual: f64,
    pub n: u64,
    pub runtime_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ToleranceGroup {
    ExactAlgebraic,
    ClosedFormNumeric,
    LimitBased,
    Negative,
}

/// Execution context handed to a suite body.
pub struct SuiteCtx {
    pub k: usize,
    pub depth: u32,
    pub tol: f64,
    pub rng: SeededRng,
    samples_scale: f64,
}

impl SuiteCtx {
    /// Scale a default draw count by the configured sample budget.
    pub fn scaled(&self, default_n: u64) -> u64 {
        ((default_n as f64 * self.samples_scale).round() as u64).max(8)
    }
}

/// What a suite body returns; `pass` is derived by the runner.
pub struct SuiteOutcome {
    pub worst: f64,
    pub n: u64,
    pub witness: Option<serde_json::Value>,
}

impl SuiteOutcome {
    pub fn new(worst: f64, n: u64) -> Self {
        SuiteOutcome {
            worst,
            n,
            witness: None,
        }
    }

    pub fn with_witness(worst: f64, n: u64, witness: serde_json::Value) -> Self {
        SuiteOutcome {
            worst,
            n,
            witness: Some(witness),
        }
    }
}

pub struct SuiteDef {
    pub tag: &'static str,
    /// The identity the suite certifies, as a stable anchor id.
    pub anchor: &'static str,
    pub description: &'static str,
    pub group: ToleranceGroup,
    pub default_tol: f64,
    pub run: fn(&mut SuiteCtx) -> Result<SuiteOutcome>,
}

/// Registry metadata exposed by `list_suites`.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteInfo {
    pub tag: &'static str,
    pub anchor: &'static str,
    pub description: &'static str,
    pub group: ToleranceGroup,
    pub default_tol: f64,
}

pub fn registry() -> &'static [SuiteDef] {
    &REGISTRY
}

pub fn list_suites() -> Vec<SuiteInfo> {
    REGISTRY
        .iter()
        .map(|s| SuiteInfo {
            tag: s.tag,
            anchor: s.anchor,
            description: s.description,
            group: s.group,
            default_tol: s.default_tol,
        })
        .collect()
}

fn tolerance_for(def: &SuiteDef, cfg: &SuiteConfig) -> f64 {
    cfg.tolerances
        .get(def.tag)
        .copied()
        .unwrap_or(def.default_tol)
}

fn run_def(def: &SuiteDef, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let tol = tolerance_for(def, cfg);
    let mut ctx = SuiteCtx {
        k: cfg.k,
        depth: cfg.depth,
        tol,
        rng: rng::stream(cfg.seed, def.tag),
        samples_scale: cfg.samples as f64 / 100_000.0,
    };
    let start = Instant::now();
    let outcome = (def.run)(&mut ctx)?;
    let runtime_ms = start.elapsed().as_millis() as u64;
    Ok(SuiteReport {
        tag: def.tag.to_string(),
        pass: outcome.worst <= tol,
        worst_residual: outcome.worst,
        n: outcome.n,
        runtime_ms,
        witness: outcome.witness,
    })
}

pub fn run_suite(tag: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let def = REGISTRY
        .iter()
        .find(|s| s.tag == tag)
        .ok_or_else(|| Error::UnknownSuite(tag.to_string()))?;
    run_def(def, cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub runtime_ms: u64,
}

/// Run every registered suite in order. Reports depend only on the
/// configuration, never on scheduling.
pub fn run_all(cfg: &SuiteConfig) -> Result<(Vec<SuiteReport>, Summary)> {
    let start = Instant::now();
    let mut reports = Vec::with_capacity(REGISTRY.len());
    for def in REGISTRY.iter() {
        reports.push(run_def(def, cfg)?);
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    let summary = Summary {
        total: reports.len(),
        passed,
        failed: reports.len() - passed,
        runtime_ms: start.elapsed().as_millis() as u64,
    };
    Ok((reports, summary))
}

use ToleranceGroup::*;

macro_rules! suites {
    ($( $tag:literal, $anchor:literal, $group:expr, $tol:expr, $run:path, $desc:literal; )*) => {
        static REGISTRY: &[SuiteDef] = &[
            $( SuiteDef {
                tag: $tag,
                anchor: $anchor,
                description: $desc,
                group: $group,
                default_tol: $tol,
                run: $run,
            }, )*
        ];
    };
}

suites! {
    // Group algebra and the gauge metric: exact identities.
    "prop:multi_law", "prop:multi_law", ExactAlgebraic, 1e-12,
        algebra::group_law,
        "group law on C^{k-1} x R: associativity, identity, inverses";
    "heis:commutator-center", "prop:z_in_center", ExactAlgebraic, 1e-12,
        algebra::commutator_center,
        "commutators are vertical; (0,1) is a commutator of horizontal elements";
    "eq:koranyi_gauge", "eq:koranyi_gauge", ExactAlgebraic, 1e-12,
        algebra::gauge_metric,
        "distance = gauge of the group quotient; symmetric; left invariant";
    "heis:fiber-metric", "prop:const_displacement_cline", ExactAlgebraic, 1e-12,
        algebra::fiber_metric,
        "distance inside a fiber is 2 sqrt|dh|, exactly";
    "prop:euclid_square_fiber", "prop:euclid_square_fiber", ExactAlgebraic, 1e-12,
        algebra::fiber_pythagoras,
        "|xz|^2 = |xy|^2 + |yz|^2 for ordered fiber triples";
    "heis:triangle-inequality", "eq:koranyi_gauge", ExactAlgebraic, 1e-12,
        algebra::triangle_inequality,
        "gauge metric satisfies the triangle inequality on sampled triples";
    "pt:scan-euclidean", "eq:PT_eq", ExactAlgebraic, 1e-12,
        algebra::ptolemy_scan_euclidean,
        "cross-ratio triples of the Euclidean plane stay in the middle triangle";
    "pt:scan-heisenberg", "eq:PT_eq", ExactAlgebraic, 1e-12,
        algebra::ptolemy_scan_heisenberg,
        "cross-ratio triples of the gauge metric stay in the middle triangle";
    "negative:L1-not-ptolemy", "eq:PT_eq", Negative, 0.5,
        algebra::l1_violation,
        "the L1 plane violates the four-point inequality (violation required)";
    "eq:PT_eq/euclidean-circles", "eq:PT_eq", ExactAlgebraic, 1e-12,
        algebra::euclidean_circles,
        "concyclic quadruples meet the circle equality";
    "eq:PT_eq/line-additivity", "eq:PT_eq", ExactAlgebraic, 1e-12,
        algebra::line_additivity,
        "distances along a geodesic line closed up at infinity are additive";
    "inv:involution", "prop:moeb_ptolemy", ExactAlgebraic, 1e-12,
        algebra::inversion_involution,
        "radius-one metric inversion is involutive and preserves cross ratios";

    // Moebius invariance of the model maps.
    "mob:translations", "lem:simply_transitivity_shifts", ClosedFormNumeric, 1e-9,
        moebius_suites::translations,
        "left translations preserve cross-ratio triples";
    "mob:dilations", "prop:homothety_property", ClosedFormNumeric, 1e-9,
        moebius_suites::dilations,
        "dilations preserve cross-ratio triples";
    "mob:unitaries", "lem:transitive_action", ClosedFormNumeric, 1e-9,
        moebius_suites::unitaries,
        "unitary base rotations preserve cross-ratio triples";
    "mob:conj-flip", "prop:vert_flip", ClosedFormNumeric, 1e-9,
        moebius_suites::conj_flip_suite,
        "the conjugation flip is an involutive isometry preserving cross ratios";
    "mob:koranyi-inversion", "lem:sinversion_minversion", ClosedFormNumeric, 1e-9,
        moebius_suites::koranyi_inversion_suite,
        "the gauge inversion preserves cross-ratio triples";
    "mob:space-inversion", "lem:sinversion_minversion", ClosedFormNumeric, 1e-9,
        moebius_suites::space_inversion_suite,
        "a composite space inversion with finite poles preserves cross ratios";
    "lem:sinversion_minversion", "lem:sinversion_minversion", ClosedFormNumeric, 1e-10,
        moebius_suites::inversion_pullback,
        "pullback under the inversion equals the radius-one metric inversion";
    "lem:sphere_sinversion", "lem:sphere_sinversion", ClosedFormNumeric, 1e-10,
        moebius_suites::sphere_mapping,
        "the inversion maps the sphere of radius r' to the sphere of radius r^2/r'";
    "lem:invariant_sphere", "lem:invariant_sphere", ClosedFormNumeric, 1e-10,
        moebius_suites::invariant_sphere,
        "exactly the calibration sphere is preserved by the space inversion";
    "chordal:moebius-equivalent", "prop:moebch-circ", ClosedFormNumeric, 1e-10,
        moebius_suites::chordal_equivalence,
        "chordal and extended Euclidean metrics share all cross-ratio triples";
    "prop:comp_dist_function", "prop:comp_dist_function", ClosedFormNumeric, 1e-9,
        moebius_suites::quartic_distance_law,
        "D(a,b)^4 = a^4 + b^4 for the base and fiber distance components";
    "lem:homogeneous_dist_function", "lem:homogeneous_dist_function", ClosedFormNumeric, 1e-10,
        moebius_suites::distance_law_homogeneity,
        "D(la, lb) = l D(a,b) under dilations";

    // Lifting, area law, complex structure.
    "prop:lift_const_2", "prop:lift_const_2", ClosedFormNumeric, 1e-6,
        lifting_suites::lifting_constant,
        "area law on a complex line of the base has lifting constant 2";
    "area:totally-real-zero", "eq:area_law", ClosedFormNumeric, 1e-6,
        lifting_suites::totally_real_plane,
        "the lifting constant of a totally real plane vanishes (k = 3)";
    "lem:adding_lifts", "lem:adding_lifts", ClosedFormNumeric, 1e-10,
        lifting_suites::split_polygon,
        "lifting a split polygon composes the lifts of its parts";
    "lem:xi_norm", "lem:xi_norm", ClosedFormNumeric, 1e-4,
        lifting_suites::xi_norm,
        "the holonomy functional has norm 4 and is linear";
    "prop:complex_structure", "prop:complex_structure", ClosedFormNumeric, 1e-4,
        lifting_suites::complex_structure,
        "holonomy maximization recovers multiplication by i with J^2 = -id";
    "prop:pi_submetry", "cor:pi_submetry", ExactAlgebraic, 1e-12,
        lifting_suites::base_projection,
        "base projection is 1-Lipschitz and isometric on horizontal lines";
    "lem:mu_distortion", "lem:mu_distortion", ClosedFormNumeric, 1e-10,
        lifting_suites::mu_distortion,
        "|mu(u) mu(v)|^2 <= |uv|^2 + displacement(T)^2";

    // Busemann functions, slopes, zigzags.
    "eq:busemann_flat", "eq:busemann_flat", LimitBased, 1e-5,
        busemann_suites::flatness,
        "opposite Busemann functions sum to a constant";
    "eq:duality", "eq:duality", LimitBased, 1e-4,
        busemann_suites::duality,
        "Busemann value equals the log-derivative of the inverted distance";
    "prop:busemann_affine", "prop:busemann_affine", LimitBased, 1e-5,
        busemann_suites::affinity,
        "Busemann functions restrict affinely to every line";
    "slope:self-is-minus-one", "prop:busemann_affine", LimitBased, 1e-6,
        busemann_suites::slope_self,
        "the slope of a line against itself is -1";
    "lem:slope_symmetry", "lem:slope_symmetry", LimitBased, 2e-3,
        busemann_suites::slope_symmetry,
        "slope(l', l) = slope(l, l'), and flips sign with orientation";
    "busemann:euclidean", "eq:busemann_flat", LimitBased, 1e-7,
        busemann_suites::euclidean_closed_form,
        "Euclidean Busemann functions are the linear forms of their directions";
    "lem:busemann_affine_zigzag", "lem:busemann_affine_zigzag", LimitBased, 1e-3,
        busemann_suites::zigzag_affinity,
        "Busemann functions are affine along zigzags with the mixed-slope rate";
    "lem:uspeed_parameter_zigzag", "lem:uspeed_parameter_zigzag", LimitBased, 1e-3,
        busemann_suites::zigzag_speed,
        "orthogonal-frame zigzags move at speed sqrt(sum s^2)/sum s";
    "lem:max_orthogonal", "lem:max_orthogonal", LimitBased, 1e-3,
        busemann_suites::maximal_frame,
        "slopes against a maximal orthogonal frame have unit square sum";

    // Bounded circles against a fiber.
    "prop:unit_rcircle", "prop:unit_rcircle", ClosedFormNumeric, 1e-9,
        circle_suites::unit_radius,
        "every point of the centered circle has distance 1 to the fiber midpoint";
    "lem:mean_geometric", "lem:mean_geometric", ClosedFormNumeric, 1e-8,
        circle_suites::mean_geometric,
        "|xz| |zy| = |zu|^2 for the projection of a circle point into the fiber";
    "rcircle:ptolemy-residual", "eq:PT_eq", ClosedFormNumeric, 1e-9,
        circle_suites::rcircle_residual,
        "inverted horizontal lines are circles for the cross-ratio classification";
    "lem:equal_distances", "lem:equal_distances", ClosedFormNumeric, 1e-8,
        circle_suites::sheet_symmetry,
        "the two sheets sit at equal distances from their common projection";
    "cor:circle_cover_twice", "cor:circle_cover_twice", ClosedFormNumeric, 1e-9,
        circle_suites::two_sheets,
        "the projection covers the fiber segment twice, monotonically per sheet";
    "lem:complex_line", "lem:complex_line", LimitBased, 1e-3,
        circle_suites::tangent_radius_complex_line,
        "tangent and radius directions at a circle point span a complex line";
    "lem:circle_rectifiable", "lem:circle_rectifiable", LimitBased, 1e-9,
        circle_suites::rectifiability,
        "arc length exceeds chord length only to quadratically small order";
    "prop:tangent_rcircle", "prop:tangent_rcircle", LimitBased, 1e-3,
        circle_suites::tangent_line_suite,
        "circles have stable tangent lines approximating to sublinear order";
    "eq:quadratic_reduce", "eq:quadratic_reduce", LimitBased, 1e-6,
        circle_suites::quadratic_excess,
        "the Busemann excess along a secant obeys the quadratic bound";
    "cor:3c_4c", "cor:3c_4c", ClosedFormNumeric, 1e-7,
        circle_suites::vertical_circles,
        "vertical circles: uniqueness data, two crossings, never cross-ratio flat";
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Anchors that must be certified by at least one suite: these are the
    /// identities the library's operations rely on.
    const REQUIRED_ANCHORS: &[&str] = &[
        "eq:PT_eq",
        "eq:koranyi_gauge",
        "eq:busemann_flat",
        "eq:duality",
        "eq:quadratic_reduce",
        "eq:area_law",
        "prop:multi_law",
        "prop:euclid_square_fiber",
        "prop:comp_dist_function",
        "prop:lift_const_2",
        "prop:complex_structure",
        "prop:busemann_affine",
        "prop:unit_rcircle",
        "prop:tangent_rcircle",
        "prop:vert_flip",
        "lem:sinversion_minversion",
        "lem:sphere_sinversion",
        "lem:invariant_sphere",
        "lem:homogeneous_dist_function",
        "lem:slope_symmetry",
        "lem:busemann_affine_zigzag",
        "lem:uspeed_parameter_zigzag",
        "lem:max_orthogonal",
        "lem:adding_lifts",
        "lem:xi_norm",
        "lem:mean_geometric",
        "lem:equal_distances",
        "lem:complex_line",
        "lem:circle_rectifiable",
        "lem:mu_distortion",
        "cor:circle_cover_twice",
        "cor:pi_submetry",
        "cor:3c_4c",
    ];

    #[test]
    fn registry_covers_required_anchors() {
        let anchors: Vec<&str> = REGISTRY.iter().map(|s| s.anchor).collect();
        for required in REQUIRED_ANCHORS {
            assert!(
                anchors.contains(required),
                "no suite certifies {required}"
            );
        }
    }

    #[test]
    fn registry_is_large_enough_and_tags_unique() {
        assert!(REGISTRY.len() >= 25, "only {} suites", REGISTRY.len());
        let mut tags: Vec<&str> = REGISTRY.iter().map(|s| s.tag).collect();
        tags.sort();
        tags.dedup();
        assert_eq!(tags.len(), REGISTRY.len(), "duplicate suite tags");
    }

    #[test]
    fn unknown_suite_is_an_error() {
        let cfg = SuiteConfig::default();
        assert!(matches!(
            run_suite("no:such-suite", &cfg),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn reports_round_trip_through_json() {
        let report = SuiteReport {
            tag: "pt:scan-euclidean".into(),
            pass: true,
            worst_residual: 3.5e-13,
            n: 1000,
            runtime_ms: 42,
            witness: Some(serde_json::json!({"kind": "finite", "coords": [1.0, 2.0]})),
        };
        let s = serde_json::to_string(&report).unwrap();
        let back: SuiteReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn seeded_reruns_are_identical() {
        let cfg = SuiteConfig {
            samples: 2_000,
            ..SuiteConfig::default()
        };
        let a = run_suite("pt:scan-heisenberg", &cfg).unwrap();
        let b = run_suite("pt:scan-heisenberg", &cfg).unwrap();
        assert_eq!(a.worst_residual, b.worst_residual);
        assert_eq!(a.n, b.n);
        assert_eq!(a.witness, b.witness);
    }
}
