//! Numerical Moebius-geometry toolkit.
//!
//! The library realizes the cross-ratio machinery of Moebius geometry on
//! two concrete boundary models: the extended Euclidean space R^n united
//! with an infinitely remote point, and the Heisenberg group carrying the
//! Koranyi gauge, the standard model for the boundary at infinity of
//! complex hyperbolic space. On top of the models it provides numerical
//! procedures for Busemann functions, slopes of geodesic lines, zigzag
//! curves, horizontal lifts of base polygons and the diagnostics of
//! Ptolemy circles, and binds each checkable identity to a seeded,
//! tolerance-controlled verification suite.

pub mod error;
pub mod point;
pub mod triple;
pub mod metric;
pub mod vecn;
pub mod rng;
pub mod euclidean;
pub mod heisenberg;
pub mod geometry;
pub mod busemann;
pub mod zigzag;
pub mod lifting;
pub mod circles;
pub mod verify;

pub use error::{Error, Result};
pub use metric::{
    circle_residual, cross_ratio, m_invert, metric_crt_agreement, moebius_residual,
    ptolemy_scan, pullback, MetricEvaluator, MoebiusMapHandle, ScanReport,
};
pub use point::{is_admissible, pt, ExtendedPoint, Quadruple};
pub use triple::{classify_triple, CrossRatioTriple, PtolemyClass, PtolemyTag};
