//! Straight-chord geodesics.
//!
//! Straight segments are shortest geodesics in every Hilbert geometry (and the
//! only ones in strictly convex bodies); all checkers work over them. Along a
//! fixed chord the Hilbert distance is a difference of log-odds coordinates,
//! so the arclength parametrization inverts in closed form.

use serde::Serialize;

use crate::body::{chord_through, Chord, ConvexBody, Point};
use crate::error::{GeometryError, Result};
use crate::metric::{chord_distance, hilbert_distance};

/// Euclidean offset `s` from a chord point such that the Hilbert distance from
/// that point to `point + s * dir` is `dist`; `to_a` is the Euclidean distance
/// back to the chord end `a` and `length` the full chord length.
pub(crate) fn offset_for_distance(to_a: f64, length: f64, dist: f64) -> f64 {
    let q0 = to_a / (length - to_a);
    let q = q0 * (2.0 * dist).exp();
    length * q0 * (2.0 * dist).exp_m1() / ((1.0 + q) * (1.0 + q0))
}

/// Straight geodesic from `x` to `y` with its cached chord.
#[derive(Debug, Clone)]
pub struct GeodesicSegment<'a> {
    body: &'a ConvexBody,
    x: Point,
    y: Point,
    chord: Option<Chord>,
    length: f64,
}

impl<'a> GeodesicSegment<'a> {
    pub fn new(body: &'a ConvexBody, x: &Point, y: &Point) -> Result<Self> {
        body.check_point(x)?;
        body.check_point(y)?;
        if !body.contains_unchecked(x) || !body.contains_unchecked(y) {
            return Err(GeometryError::NotInDomain);
        }
        let (chord, length) = if x == y {
            (None, 0.0)
        } else {
            let c = chord_through(body, x, y)?;
            let l = chord_distance(&c);
            (Some(c), l)
        };
        Ok(Self { body, x: x.clone(), y: y.clone(), chord, length })
    }

    pub fn body(&self) -> &'a ConvexBody {
        self.body
    }

    pub fn start(&self) -> &Point {
        &self.x
    }

    pub fn end(&self) -> &Point {
        &self.y
    }

    pub fn chord(&self) -> Option<&Chord> {
        self.chord.as_ref()
    }

    /// Hilbert length, equal to `d_K(x, y)`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// `(1 - t) x + t y`.
    pub fn eval_affine(&self, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GeometryError::OutOfRange { what: "affine parameter", value: t });
        }
        if t == 1.0 {
            return Ok(self.y.clone());
        }
        if self.chord.is_none() {
            return Ok(self.x.clone());
        }
        Ok(&self.x * (1.0 - t) + &self.y * t)
    }

    /// The point at Hilbert distance `s` from `x` along the segment.
    pub fn eval_arclength(&self, s: f64) -> Result<Point> {
        if !(s >= 0.0 && s <= self.length * (1.0 + 1e-14)) {
            return Err(GeometryError::OutOfRange { what: "arclength", value: s });
        }
        let Some(c) = &self.chord else {
            return Ok(self.x.clone());
        };
        if s >= self.length {
            return Ok(self.y.clone());
        }
        let offset = offset_for_distance(c.to_a, c.length(), s).min(c.gap);
        Ok(&self.x + offset * &c.dir)
    }

    /// `γ(t)` for the constant-speed parametrization on `[0, 1]`.
    pub fn eval_unit(&self, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GeometryError::OutOfRange { what: "unit parameter", value: t });
        }
        self.eval_arclength(t * self.length)
    }
}

/// Metric midpoint `m(x, y)` on the straight chord.
pub fn midpoint(body: &ConvexBody, x: &Point, y: &Point) -> Result<Point> {
    let seg = GeodesicSegment::new(body, x, y)?;
    seg.eval_arclength(0.5 * seg.length())
}

/// Smallest grid accepted by [`dist_to_geodesic`].
pub const MIN_DIST_GRID: usize = 16;
/// Default grid of [`dist_to_geodesic`].
pub const DEFAULT_DIST_GRID: usize = 64;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// `dist(γ, q) = inf_t d(γ(t), q)`: uniform affine grid, then golden-section
/// refinement in the two cells around the best grid node.
///
/// Unimodality of `t -> d(γ(t), q)` is not assumed globally; only the bracketing
/// cells are refined.
pub fn dist_to_geodesic(seg: &GeodesicSegment<'_>, q: &Point, grid: usize) -> Result<f64> {
    if grid < MIN_DIST_GRID {
        return Err(GeometryError::OutOfRange { what: "dist_to_geodesic grid", value: grid as f64 });
    }
    let body = seg.body();
    body.check_point(q)?;
    if !body.contains_unchecked(q) {
        return Err(GeometryError::NotInDomain);
    }
    if seg.chord().is_none() {
        return hilbert_distance(body, seg.start(), q);
    }
    let f = |t: f64| -> Result<f64> { hilbert_distance(body, &seg.eval_affine(t)?, q) };

    let mut best = f64::INFINITY;
    let mut best_i = 0;
    for i in 0..=grid {
        let v = f(i as f64 / grid as f64)?;
        if v < best {
            best = v;
            best_i = i;
        }
    }
    if best == 0.0 {
        return Ok(0.0);
    }
    let mut lo = (best_i.saturating_sub(1)) as f64 / grid as f64;
    let mut hi = ((best_i + 1).min(grid)) as f64 / grid as f64;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while hi - lo > 1e-13 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d)?;
        }
        best = best.min(fc).min(fd);
    }
    Ok(best)
}

/// Capsule `C_γ(α) = {q : dist(γ, q) <= α}`.
#[derive(Debug, Clone)]
pub struct Capsule<'a> {
    pub segment: GeodesicSegment<'a>,
    pub alpha: f64,
}

impl<'a> Capsule<'a> {
    pub fn new(segment: GeodesicSegment<'a>, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(GeometryError::OutOfRange { what: "capsule radius", value: alpha });
        }
        Ok(Self { segment, alpha })
    }
}

/// Serializable description of a segment, used in witnesses and reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentRecord {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub length: f64,
}

impl From<&GeodesicSegment<'_>> for SegmentRecord {
    fn from(s: &GeodesicSegment<'_>) -> Self {
        Self { start: s.start().as_slice().to_vec(), end: s.end().as_slice().to_vec(), length: s.length() }
    }
}
