use thiserror::Error;

/// Errors raised by geometric operations on a convex body.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point not in domain")]
    NotInDomain,

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("direction vector must be nonzero")]
    ZeroDirection,

    #[error("points coincide; the chord through them is undefined")]
    CoincidentPoints,

    #[error("point too close to boundary (distance {distance:e} along chord)")]
    TooCloseToBoundary { distance: f64 },

    #[error("root bracketing failed along ray (unbounded or non-convex body)")]
    BracketFailure,

    #[error("degenerate boundary: defining function gradient vanishes at {0:?}")]
    DegenerateBoundary(Vec<f64>),

    #[error("points are not collinear (relative deviation {deviation:e})")]
    NonCollinear { deviation: f64 },

    #[error("chord points are not ordered a, x, y, b")]
    OrderViolation,

    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("invalid body: {0}")]
    InvalidBody(String),

    #[error("finsler operations require a smooth body; polytopes are not supported")]
    NonSmoothBody,

    #[error("fundamental tensor is not positive definite")]
    NotPositiveDefinite,

    #[error("flag pole and transverse edge are collinear")]
    CollinearFlag,

    #[error("geodesics do not share a basepoint (gap {gap:e})")]
    NoSharedBasepoint { gap: f64 },

    #[error("comparison angle argument {0} outside [-1, 1]")]
    AngleDomain(f64),

    #[error("capsule is not admissible for the sampling region")]
    InadmissibleCapsule,

    #[error("rejection sampling exhausted {0} attempts")]
    SamplingExhausted(usize),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
