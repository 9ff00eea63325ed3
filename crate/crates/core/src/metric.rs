//! Hilbert distance, Funk and Hilbert norms, and integral length of curves.
//!
//! The cross-ratio used throughout is the classical one,
//! `[a, x, y, b] = (|y - a| |x - b|) / (|x - a| |y - b|)`, which equals 1 exactly
//! when `x = y` and reproduces the Beltrami–Klein model on the ball.

use crate::body::{chord_through, Chord, ConvexBody, Point, Vector};
use crate::error::{GeometryError, Result};

/// Relative collinearity tolerance for [`cross_ratio`].
pub const COLLINEAR_TOL: f64 = 1e-9;

/// Classical cross-ratio of four collinear points ordered `a, x, y, b`.
pub fn cross_ratio(a: &Point, x: &Point, y: &Point, b: &Point) -> Result<f64> {
    let dim = a.len();
    for p in [x, y, b] {
        if p.len() != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: p.len() });
        }
    }
    let line = b - a;
    let len = line.norm();
    if len == 0.0 {
        return Err(GeometryError::OrderViolation);
    }
    let dir = &line / len;
    let mut params = [0.0; 2];
    for (slot, p) in params.iter_mut().zip([x, y]) {
        let w = p - a;
        let s = w.dot(&dir);
        let deviation = (&w - s * &dir).norm() / len;
        if deviation > COLLINEAR_TOL {
            return Err(GeometryError::NonCollinear { deviation });
        }
        *slot = s;
    }
    let [sx, sy] = params;
    if !(0.0 < sx && sx <= sy && sy < len) {
        return Err(GeometryError::OrderViolation);
    }
    let xa = (x - a).norm();
    let yb = (y - b).norm();
    if xa == 0.0 || yb == 0.0 {
        return Err(GeometryError::OrderViolation);
    }
    Ok(((y - a).norm() * (x - b).norm()) / (xa * yb))
}

/// Hilbert distance between the chord's interior points, `1/2 ln [a, x, y, b]`.
///
/// Evaluated as `1/2 (ln1p(|y-x|/|x-a|) + ln1p(|y-x|/|y-b|))`, which is exact for
/// collinear ordered points and keeps full relative accuracy for nearby `x, y`.
pub fn chord_distance(chord: &Chord) -> f64 {
    0.5 * ((chord.gap / chord.to_a).ln_1p() + (chord.gap / chord.to_b).ln_1p())
}

pub fn hilbert_distance(body: &ConvexBody, x: &Point, y: &Point) -> Result<f64> {
    body.check_point(x)?;
    body.check_point(y)?;
    if !body.contains_unchecked(x) || !body.contains_unchecked(y) {
        return Err(GeometryError::NotInDomain);
    }
    if x == y {
        return Ok(0.0);
    }
    Ok(chord_distance(&chord_through(body, x, y)?))
}

/// Funk norm `F~(p, u) = 1 / t*`, where `p + t* u` is the boundary exit.
pub fn funk_norm(body: &ConvexBody, p: &Point, u: &Vector) -> Result<f64> {
    Ok(1.0 / body.boundary_hit(p, u)?)
}

/// Hilbert–Finsler norm `F(p, u) = (F~(p, u) + F~(p, -u)) / 2`.
pub fn hilbert_norm(body: &ConvexBody, p: &Point, u: &Vector) -> Result<f64> {
    let forward = funk_norm(body, p, u)?;
    let backward = funk_norm(body, p, &-u)?;
    Ok(0.5 * (forward + backward))
}

/// Piecewise-linear curve through at least two points, consecutive points distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylineCurve {
    points: Vec<Point>,
}

impl PolylineCurve {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(GeometryError::OutOfRange { what: "polyline point count", value: points.len() as f64 });
        }
        let dim = points[0].len();
        for w in points.windows(2) {
            if w[1].len() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, found: w[1].len() });
            }
            if w[0] == w[1] {
                return Err(GeometryError::CoincidentPoints);
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }
}

const GL5_NODES: [f64; 5] =
    [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Integral length `L = ∫ F(γ, γ')` by composite 5-point Gauss–Legendre quadrature
/// on each straight segment.
pub fn integral_length(body: &ConvexBody, curve: &PolylineCurve, subdivisions_per_segment: usize) -> Result<f64> {
    if subdivisions_per_segment == 0 {
        return Err(GeometryError::OutOfRange { what: "subdivisions_per_segment", value: 0.0 });
    }
    for p in curve.points() {
        body.check_point(p)?;
        if !body.contains_unchecked(p) {
            return Err(GeometryError::NotInDomain);
        }
    }
    let h = 1.0 / subdivisions_per_segment as f64;
    let mut total = 0.0;
    for w in curve.points().windows(2) {
        let velocity = &w[1] - &w[0];
        let mut seg = 0.0;
        for k in 0..subdivisions_per_segment {
            let mid = (k as f64 + 0.5) * h;
            for (node, weight) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
                let t = mid + 0.5 * h * node;
                let p = &w[0] + t * &velocity;
                seg += weight * hilbert_norm(body, &p, &velocity)?;
            }
        }
        total += 0.5 * h * seg;
    }
    Ok(total)
}
