use thiserror::Error;

/// Errors shared by all modules of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("inadmissible quadruple: an entry occurs three or more times")]
    InadmissibleQuadruple,
    #[error("metric cannot evaluate the requested configuration: {0}")]
    MetricDomain(String),
    #[error("inversion radius must be positive, got {0}")]
    RadiusNonPositive(f64),
    #[error("inversion center coincides with the infinitely remote point of the metric")]
    CenterIsOmega,
    #[error("map produced a non-finite image for {0}")]
    MapUndefinedAt(String),
    #[error("need at least four cyclically ordered points, got {0}")]
    TooFewPoints(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("direction must have unit norm, got norm {0}")]
    NonUnitDirection(f64),
    #[error("space inversion poles must be distinct")]
    CoincidentPoles,
    #[error("coincident points")]
    CoincidentPoints,
    #[error("line passes through the inversion pole")]
    PoleOnLine,
    #[error("the infinitely remote point has no base projection")]
    InfinityNotProjectable,
    #[error("map is undefined at the origin (it is sent to the infinitely remote point)")]
    UndefinedAtOrigin,
    #[error("degenerate point triple")]
    DegenerateTriple,
    #[error("numerical limit did not converge: estimate {estimate}, error estimate {err_est}, tol {tol}")]
    NonConvergent {
        estimate: f64,
        err_est: f64,
        tol: f64,
    },
    #[error("restriction is not affine within tolerance: residual {0}")]
    NonAffine(f64),
    #[error("slope estimation failed: {0}")]
    SlopeEstimationFailed(String),
    #[error("edge lift failed: {0}")]
    EdgeLiftFailed(String),
    #[error("vectors are not orthogonal: inner product {0}")]
    NotOrthogonal(f64),
    #[error("maximizer is not isolated: gap {0}")]
    MaximizerNotIsolated(f64),
    #[error("curve does not meet the fiber in exactly two points (found {0})")]
    CircleDoesNotMeetFiberTwice(usize),
    #[error("distance parameterization failed: {0}")]
    ParameterizationFailed(String),
    #[error("unknown suite tag: {0}")]
    UnknownSuite(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
