//! Bounded convex open domains and their two geometric oracles: membership and
//! ray–boundary intersection.
//!
//! Every other module talks to a body only through [`ConvexBody::contains`] and
//! [`ConvexBody::boundary_hit`] (plus [`chord_through`], which is built from the
//! latter). Ellipsoids and polytopes answer the ray query in closed form; smooth
//! sublevel bodies bracket the exit parameter and refine it with Brent's method.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{GeometryError, Result};
use crate::sampling;

pub type Point = DVector<f64>;
pub type Vector = DVector<f64>;

/// Chord endpoints closer than this (Euclidean, along the chord) are rejected.
pub const BOUNDARY_CLEARANCE: f64 = 1e-10;

/// Relative tolerance of the smooth-body root refinement.
pub const ROOT_REL_TOL: f64 = 1e-15;

/// Open half-space `<normal, x> < offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: Vector,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: Vector, offset: f64) -> Self {
        Self { normal, offset }
    }
}

/// One term `coef * prod x_i^powers[i]` of a polynomial defining function.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// Built-in catalog of defining functions `phi`, with `K = {phi < 0}`.
#[derive(Debug, Clone, PartialEq)]
pub enum DefiningFunction {
    /// `sum_i |x_i|^exponent - 1`.
    Superellipse {
        exponent: f64,
    },
    Polynomial {
        terms: Vec<Monomial>,
    },
}

#[inline]
fn abs_pow(v: f64, exponent: f64) -> f64 {
    let a = v.abs();
    if exponent.fract() == 0.0 && exponent <= 64.0 {
        a.powi(exponent as i32)
    } else {
        a.powf(exponent)
    }
}

impl DefiningFunction {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            DefiningFunction::Superellipse { exponent } => x.iter().map(|&v| abs_pow(v, *exponent)).sum::<f64>() - 1.0,
            DefiningFunction::Polynomial { terms } => terms
                .iter()
                .map(|m| m.coef * x.iter().zip(&m.powers).map(|(&v, &k)| v.powi(k as i32)).product::<f64>())
                .sum(),
        }
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        match self {
            DefiningFunction::Superellipse { exponent } => {
                for (o, &v) in out.iter_mut().zip(x) {
                    *o = exponent * abs_pow(v, exponent - 1.0) * v.signum();
                    if v == 0.0 {
                        *o = 0.0;
                    }
                }
            }
            DefiningFunction::Polynomial { terms } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                for m in terms {
                    for (i, o) in out.iter_mut().enumerate() {
                        let ki = m.powers[i];
                        if ki == 0 {
                            continue;
                        }
                        let mut prod = m.coef * ki as f64;
                        for (j, (&v, &k)) in x.iter().zip(&m.powers).enumerate() {
                            let e = if j == i { k - 1 } else { k };
                            prod *= v.powi(e as i32);
                        }
                        *o += prod;
                    }
                }
            }
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            DefiningFunction::Superellipse { exponent } => {
                if !(exponent.is_finite() && *exponent >= 1.0) {
                    return Err(GeometryError::InvalidBody(format!(
                        "superellipse exponent must be >= 1, got {exponent}"
                    )));
                }
            }
            DefiningFunction::Polynomial { terms } => {
                if terms.is_empty() {
                    return Err(GeometryError::InvalidBody("polynomial has no terms".into()));
                }
                for t in terms {
                    if t.powers.len() != dim || !t.coef.is_finite() {
                        return Err(GeometryError::InvalidBody(format!(
                            "polynomial term {t:?} does not match dimension {dim}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Smooth sublevel body `{phi < 0}` together with an interior point and a radius
/// of a Euclidean ball about that point which encloses the body.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothBody {
    pub phi: DefiningFunction,
    pub center: Point,
    pub enclosing_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BodyKind {
    Ball {
        center: Point,
        radius: f64,
    },
    /// `(x - c)^T A (x - c) < 1` with `A` positive definite.
    Ellipsoid {
        center: Point,
        shape: DMatrix<f64>,
    },
    Polytope {
        halfspaces: Vec<HalfSpace>,
    },
    Smooth(SmoothBody),
}

/// A bounded convex open domain in R^n, n >= 2.
///
/// Bodies are immutable after construction and are `Send + Sync`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexBody {
    kind: BodyKind,
    dim: usize,
    interior: Point,
    lower: Point,
    upper: Point,
}

fn ensure_finite(v: &DVector<f64>) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::NonFinite)
    }
}

impl ConvexBody {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        let dim = center.len();
        check_body_dim(dim)?;
        ensure_finite(&center)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::InvalidBody(format!("radius must be positive, got {radius}")));
        }
        let r = DVector::from_element(dim, radius);
        Ok(Self {
            lower: &center - &r,
            upper: &center + &r,
            interior: center.clone(),
            kind: BodyKind::Ball { center, radius },
            dim,
        })
    }

    /// Unit ball about the origin.
    pub fn unit_ball(dim: usize) -> Result<Self> {
        Self::ball(DVector::zeros(dim), 1.0)
    }

    pub fn ellipsoid(center: Point, shape: DMatrix<f64>) -> Result<Self> {
        let dim = center.len();
        check_body_dim(dim)?;
        ensure_finite(&center)?;
        if shape.nrows() != dim || shape.ncols() != dim {
            return Err(GeometryError::InvalidBody(format!(
                "shape matrix is {}x{}, expected {dim}x{dim}",
                shape.nrows(),
                shape.ncols()
            )));
        }
        let asym = (&shape - shape.transpose()).abs().max();
        if !(asym <= 1e-12 * shape.abs().max()) {
            return Err(GeometryError::InvalidBody("shape matrix is not symmetric".into()));
        }
        let chol = shape
            .clone()
            .cholesky()
            .ok_or_else(|| GeometryError::InvalidBody("shape matrix is not positive definite".into()))?;
        let inv = chol.inverse();
        let half = DVector::from_iterator(dim, (0..dim).map(|i| inv[(i, i)].sqrt()));
        Ok(Self {
            lower: &center - &half,
            upper: &center + &half,
            interior: center.clone(),
            kind: BodyKind::Ellipsoid { center, shape },
            dim,
        })
    }

    /// Bounded polytope `{x : <n_i, x> < b_i for all i}`.
    pub fn polytope(halfspaces: Vec<HalfSpace>) -> Result<Self> {
        let dim = halfspaces
            .first()
            .map(|h| h.normal.len())
            .ok_or_else(|| GeometryError::InvalidBody("polytope has no half-spaces".into()))?;
        check_body_dim(dim)?;
        for h in &halfspaces {
            if h.normal.len() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, found: h.normal.len() });
            }
            ensure_finite(&h.normal)?;
            if !h.offset.is_finite() {
                return Err(GeometryError::NonFinite);
            }
            if h.normal.norm() == 0.0 {
                return Err(GeometryError::InvalidBody("half-space normal is zero".into()));
            }
        }
        if halfspaces.len() <= dim {
            return Err(GeometryError::InvalidBody(format!(
                "a bounded polytope in R^{dim} needs at least {} half-spaces",
                dim + 1
            )));
        }
        check_polytope_bounded(&halfspaces, dim)?;
        let vertices = polytope_vertices(&halfspaces, dim);
        if vertices.is_empty() {
            return Err(GeometryError::InvalidBody("polytope has no vertices".into()));
        }
        let mut lower = vertices[0].clone();
        let mut upper = vertices[0].clone();
        let mut centroid = DVector::zeros(dim);
        for v in &vertices {
            lower = lower.inf(v);
            upper = upper.sup(v);
            centroid += v;
        }
        centroid /= vertices.len() as f64;
        let body = Self { kind: BodyKind::Polytope { halfspaces }, dim, interior: centroid, lower, upper };
        if !body.contains_unchecked(&body.interior) {
            return Err(GeometryError::InvalidBody("polytope has empty interior".into()));
        }
        Ok(body)
    }

    /// Axis-aligned box `|x_i - c_i| < h_i`.
    pub fn cube(center: Point, half_widths: &[f64]) -> Result<Self> {
        let dim = center.len();
        let mut hs = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            let e = DVector::from_fn(dim, |j, _| if i == j { 1.0 } else { 0.0 });
            hs.push(HalfSpace::new(e.clone(), center[i] + half_widths[i]));
            hs.push(HalfSpace::new(-e, -(center[i] - half_widths[i])));
        }
        Self::polytope(hs)
    }

    pub fn smooth(phi: DefiningFunction, center: Point, enclosing_radius: f64) -> Result<Self> {
        let dim = center.len();
        check_body_dim(dim)?;
        ensure_finite(&center)?;
        phi.check_dim(dim)?;
        if !(enclosing_radius.is_finite() && enclosing_radius > 0.0) {
            return Err(GeometryError::InvalidBody(format!(
                "enclosing radius must be positive, got {enclosing_radius}"
            )));
        }
        if !(phi.value(center.as_slice()) < 0.0) {
            return Err(GeometryError::InvalidBody("center is not in {phi < 0}".into()));
        }
        let r = DVector::from_element(dim, enclosing_radius);
        Ok(Self {
            lower: &center - &r,
            upper: &center + &r,
            interior: center.clone(),
            kind: BodyKind::Smooth(SmoothBody { phi, center, enclosing_radius }),
            dim,
        })
    }

    /// `sum |x_i|^exponent < 1` in R^dim.
    pub fn superellipse(dim: usize, exponent: f64) -> Result<Self> {
        Self::smooth(DefiningFunction::Superellipse { exponent }, DVector::zeros(dim), (dim as f64).sqrt() * 1.000001)
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// A reference interior point (center for balls, ellipsoids and smooth bodies,
    /// vertex centroid for polytopes).
    pub fn interior_point(&self) -> &Point {
        &self.interior
    }

    /// Axis-aligned box enclosing the body.
    pub fn bounding_box(&self) -> (&Point, &Point) {
        (&self.lower, &self.upper)
    }

    /// Smallest half-width of the bounding box; the body's characteristic length.
    pub fn scale(&self) -> f64 {
        (&self.upper - &self.lower).min() * 0.5
    }

    pub fn is_polytope(&self) -> bool {
        matches!(self.kind, BodyKind::Polytope { .. })
    }

    pub(crate) fn check_point(&self, p: &Point) -> Result<()> {
        if p.len() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, found: p.len() });
        }
        ensure_finite(p)
    }

    /// Whether `p` lies in the open domain.
    pub fn contains(&self, p: &Point) -> Result<bool> {
        self.check_point(p)?;
        Ok(self.contains_unchecked(p))
    }

    pub(crate) fn contains_unchecked(&self, p: &Point) -> bool {
        match &self.kind {
            BodyKind::Ball { center, radius } => (p - center).norm_squared() < radius * radius,
            BodyKind::Ellipsoid { center, shape } => {
                let w = p - center;
                w.dot(&(shape * &w)) < 1.0
            }
            BodyKind::Polytope { halfspaces } => halfspaces.iter().all(|h| h.normal.dot(p) < h.offset),
            BodyKind::Smooth(s) => s.phi.value(p.as_slice()) < 0.0,
        }
    }

    /// Exit parameter `t*` of the ray `p + t u` through the boundary.
    ///
    /// `p + t u` lies in the body for `0 <= t < t*` and `p + t* u` is on the boundary.
    pub fn boundary_hit(&self, p: &Point, u: &Vector) -> Result<f64> {
        self.check_point(p)?;
        if u.len() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, found: u.len() });
        }
        ensure_finite(u)?;
        if u.iter().all(|&c| c == 0.0) {
            return Err(GeometryError::ZeroDirection);
        }
        if !self.contains_unchecked(p) {
            return Err(GeometryError::NotInDomain);
        }
        match &self.kind {
            BodyKind::Ball { center, radius } => {
                let inv_r2 = 1.0 / (radius * radius);
                let w = p - center;
                Ok(quadratic_exit(u.norm_squared() * inv_r2, u.dot(&w) * inv_r2, w.norm_squared() * inv_r2 - 1.0))
            }
            BodyKind::Ellipsoid { center, shape } => {
                let w = p - center;
                let aw = shape * &w;
                Ok(quadratic_exit(u.dot(&(shape * u)), u.dot(&aw), w.dot(&aw) - 1.0))
            }
            BodyKind::Polytope { halfspaces } => halfspaces
                .iter()
                .filter_map(|h| {
                    let rate = h.normal.dot(u);
                    (rate > 0.0).then(|| (h.offset - h.normal.dot(p)) / rate)
                })
                .min_by(|a, b| a.total_cmp(b))
                .ok_or(GeometryError::BracketFailure),
            BodyKind::Smooth(s) => {
                let norm = u.norm();
                let dir = u / norm;
                Ok(smooth_exit(s, p, &dir)? / norm)
            }
        }
    }
}

fn check_body_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(GeometryError::InvalidBody(format!("dimension must be >= 2, got {dim}")));
    }
    Ok(())
}

/// Positive root of `qa t^2 + 2 qb t + qc = 0` with `qa > 0`, `qc < 0`.
fn quadratic_exit(qa: f64, qb: f64, qc: f64) -> f64 {
    let disc = (qb * qb - qa * qc).sqrt();
    if qb > 0.0 {
        -qc / (qb + disc)
    } else {
        (disc - qb) / qa
    }
}

fn smooth_exit(s: &SmoothBody, p: &Point, dir: &Vector) -> Result<f64> {
    let dim = p.len();
    let mut buf = vec![0.0; dim];
    let mut psi = |t: f64| {
        for i in 0..dim {
            buf[i] = p[i] + t * dir[i];
        }
        s.phi.value(&buf)
    };
    // Exit parameter of the enclosing ball bounds the expansion.
    let w = p - &s.center;
    let qb = dir.dot(&w);
    let qc = w.norm_squared() - s.enclosing_radius * s.enclosing_radius;
    if qc >= 0.0 {
        return Err(GeometryError::BracketFailure);
    }
    let t_max = quadratic_exit(1.0, qb, qc);

    let mut lo = 0.0;
    let mut f_lo = psi(0.0);
    let mut hi = t_max / 1024.0;
    let mut f_hi = psi(hi);
    while f_hi < 0.0 {
        if hi >= t_max {
            return Err(GeometryError::BracketFailure);
        }
        lo = hi;
        f_lo = f_hi;
        hi = (2.0 * hi).min(t_max);
        f_hi = psi(hi);
    }
    let mut t = brent(&mut psi, lo, hi, f_lo, f_hi, ROOT_REL_TOL * hi);

    // Brent stops anywhere inside its tolerance window, which makes `t` jump
    // between nearby inputs. Newton polishing from there leaves only the
    // rounding error of `phi`, so finite differences of `t` stay smooth.
    let mut grad = vec![0.0; dim];
    let mut hit: Vec<f64> = (0..dim).map(|i| p[i] + t * dir[i]).collect();
    s.phi.gradient(&hit, &mut grad);
    if grad.iter().all(|&g| g == 0.0) {
        return Err(GeometryError::DegenerateBoundary(hit));
    }
    for _ in 0..2 {
        let slope: f64 = grad.iter().zip(dir.iter()).map(|(g, d)| g * d).sum();
        if !(slope > 0.0) {
            break;
        }
        let next = t - psi(t) / slope;
        if !(next > lo && next <= hi) {
            break;
        }
        t = next;
        for i in 0..dim {
            hit[i] = p[i] + t * dir[i];
        }
        s.phi.gradient(&hit, &mut grad);
    }
    Ok(t)
}

/// Brent's bracketing root finder (bisection, secant and inverse quadratic steps).
fn brent(f: &mut impl FnMut(f64) -> f64, a0: f64, b0: f64, fa0: f64, fb0: f64, tol: f64) -> f64 {
    let (mut a, mut b, mut fa, mut fb) = (a0, b0, fa0, fb0);
    if fb == 0.0 {
        return b;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    b
}

fn cofactor_null_vector(rows: &[&Vector], dim: usize) -> Vector {
    // Generalized cross product of dim-1 vectors.
    DVector::from_fn(dim, |j, _| {
        let m = DMatrix::from_fn(dim - 1, dim - 1, |r, c| {
            let col = if c < j { c } else { c + 1 };
            rows[r][col]
        });
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sign * m.determinant()
    })
}

fn check_polytope_bounded(hs: &[HalfSpace], dim: usize) -> Result<()> {
    let n = DMatrix::from_fn(hs.len(), dim, |i, j| hs[i].normal[j] / hs[i].normal.norm());
    let sv = n.clone().svd(false, false).singular_values;
    if sv.min() < 1e-12 * sv.max() {
        return Err(GeometryError::InvalidBody("polytope is unbounded (normals do not span)".into()));
    }
    let unit: Vec<Vector> = hs.iter().map(|h| &h.normal / h.normal.norm()).collect();
    for subset in (0..hs.len()).combinations(dim - 1) {
        let rows: Vec<&Vector> = subset.iter().map(|&i| &unit[i]).collect();
        let u = cofactor_null_vector(&rows, dim);
        let norm = u.norm();
        if norm < 1e-12 {
            continue;
        }
        let u = u / norm;
        for cand in [u.clone(), -u] {
            if unit.iter().all(|nv| nv.dot(&cand) <= 1e-12) {
                return Err(GeometryError::InvalidBody(format!(
                    "polytope is unbounded along recession direction {:?}",
                    cand.as_slice()
                )));
            }
        }
    }
    Ok(())
}

fn polytope_vertices(hs: &[HalfSpace], dim: usize) -> Vec<Point> {
    let scale = hs.iter().map(|h| h.offset.abs() / h.normal.norm()).fold(1.0, f64::max);
    let mut out: Vec<Point> = Vec::new();
    for subset in (0..hs.len()).combinations(dim) {
        let m = DMatrix::from_fn(dim, dim, |r, c| hs[subset[r]].normal[c]);
        let rhs = DVector::from_iterator(dim, subset.iter().map(|&i| hs[i].offset));
        let Some(v) = m.lu().solve(&rhs) else { continue };
        if !v.iter().all(|c| c.is_finite()) {
            continue;
        }
        let feasible = hs.iter().all(|h| h.normal.dot(&v) <= h.offset + 1e-9 * scale * h.normal.norm());
        if feasible && !out.iter().any(|w| (w - &v).norm() <= 1e-12 * scale) {
            out.push(v);
        }
    }
    out
}

/// The four collinear points `a, x, y, b` of a chord, in order along the line.
#[derive(Debug, Clone, PartialEq)]
pub struct Chord {
    pub a: Point,
    pub x: Point,
    pub y: Point,
    pub b: Point,
    /// Unit direction from `x` toward `y`.
    pub dir: Vector,
    /// `|x - a|`.
    pub to_a: f64,
    /// `|y - x|`.
    pub gap: f64,
    /// `|b - y|`.
    pub to_b: f64,
}

impl Chord {
    /// Euclidean length `|b - a|`.
    pub fn length(&self) -> f64 {
        self.to_a + self.gap + self.to_b
    }

    /// The same chord traversed from `y` to `x`.
    pub fn reversed(&self) -> Chord {
        Chord {
            a: self.b.clone(),
            x: self.y.clone(),
            y: self.x.clone(),
            b: self.a.clone(),
            dir: -&self.dir,
            to_a: self.to_b,
            gap: self.gap,
            to_b: self.to_a,
        }
    }
}

/// Chord of the body through two distinct interior points.
pub fn chord_through(body: &ConvexBody, x: &Point, y: &Point) -> Result<Chord> {
    body.check_point(x)?;
    body.check_point(y)?;
    if !body.contains_unchecked(x) || !body.contains_unchecked(y) {
        return Err(GeometryError::NotInDomain);
    }
    let diff = y - x;
    let gap = diff.norm();
    if gap == 0.0 {
        return Err(GeometryError::CoincidentPoints);
    }
    let dir = diff / gap;
    let to_a = body.boundary_hit(x, &-&dir)?;
    let to_b = body.boundary_hit(y, &dir)?;
    let nearest = to_a.min(to_b);
    if nearest < BOUNDARY_CLEARANCE {
        return Err(GeometryError::TooCloseToBoundary { distance: nearest });
    }
    Ok(Chord { a: x - to_a * &dir, b: y + to_b * &dir, x: x.clone(), y: y.clone(), dir, to_a, gap, to_b })
}

/// Outcome of sampled convexity and boundedness checks on a body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub samples_tested: usize,
    pub seed: u64,
    pub failure: Option<ValidationFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationFailure {
    pub check: String,
    pub message: String,
    pub points: Vec<Vec<f64>>,
}

fn fail(check: &str, message: impl Into<String>, points: &[&Point]) -> ValidationFailure {
    ValidationFailure {
        check: check.into(),
        message: message.into(),
        points: points.iter().map(|p| p.as_slice().to_vec()).collect(),
    }
}

/// Sampled checks that the body is bounded and convex.
///
/// Three probes per sample: a midpoint test on a random pair of members of the
/// bounding box, a ray-consistency test of `boundary_hit` from the interior
/// point, and (for smooth bodies) a membership test on the enclosing sphere.
/// Deterministic for a fixed seed.
pub fn validate(body: &ConvexBody, sample_count: usize, seed: u64) -> ValidationReport {
    let (lo, hi) = body.bounding_box();
    let mut tested = 0;
    for i in 0..sample_count {
        let mut rng = sampling::substream(seed, i as u64);
        tested += 1;

        // Midpoint convexity.
        let mut pair = Vec::with_capacity(2);
        for _ in 0..1000 {
            let p = sampling::uniform_in_box(&mut rng, lo, hi);
            if body.contains_unchecked(&p) {
                pair.push(p);
                if pair.len() == 2 {
                    break;
                }
            }
        }
        if pair.len() == 2 {
            let m = (&pair[0] + &pair[1]) * 0.5;
            if !body.contains_unchecked(&m) {
                return ValidationReport {
                    passed: false,
                    samples_tested: tested,
                    seed,
                    failure: Some(fail("convexity", "midpoint of two members lies outside", &[&pair[0], &pair[1], &m])),
                };
            }
        }

        // Ray consistency from the interior point.
        let p = body.interior_point();
        let u = sampling::unit_direction(&mut rng, body.dim());
        match body.boundary_hit(p, &u) {
            Ok(t) => {
                let s = rng.random_range(0.0..1.0);
                let inner = p + (s * t) * &u;
                let outer = p + (t * (1.0 + 1e-6) + 1e-9) * &u;
                if !body.contains_unchecked(&inner) || body.contains_unchecked(&outer) {
                    return ValidationReport {
                        passed: false,
                        samples_tested: tested,
                        seed,
                        failure: Some(fail(
                            "ray",
                            "ray membership inconsistent with boundary hit",
                            &[p, &inner, &outer],
                        )),
                    };
                }
            }
            Err(e) => {
                let q = p + &u;
                return ValidationReport {
                    passed: false,
                    samples_tested: tested,
                    seed,
                    failure: Some(fail("ray", format!("boundary hit failed: {e}"), &[p, &q])),
                };
            }
        }

        // The body must stay strictly inside its enclosing ball.
        if let BodyKind::Smooth(s) = body.kind() {
            let q = &s.center + s.enclosing_radius * &u;
            if body.contains_unchecked(&q) {
                return ValidationReport {
                    passed: false,
                    samples_tested: tested,
                    seed,
                    failure: Some(fail("bounded", "domain reaches the enclosing sphere", &[&q])),
                };
            }
        }
    }
    ValidationReport { passed: true, samples_tested: tested, seed, failure: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn square() -> ConvexBody {
        ConvexBody::cube(dvector![0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    fn ellipse() -> ConvexBody {
        ConvexBody::ellipsoid(dvector![0.0, 0.0], DMatrix::from_diagonal(&dvector![0.25, 1.0])).unwrap()
    }

    #[test]
    fn contains_examples() {
        let disk = ConvexBody::unit_ball(2).unwrap();
        assert!(disk.contains(&dvector![0.0, 0.0]).unwrap());
        assert!(!disk.contains(&dvector![1.0, 0.0]).unwrap());
        assert!(square().contains(&dvector![0.5, 0.5]).unwrap());
        assert_eq!(
            disk.contains(&dvector![0.0, 0.0, 0.0]),
            Err(GeometryError::DimensionMismatch { expected: 2, found: 3 })
        );
    }

    #[test]
    fn boundary_hit_examples() {
        let disk = ConvexBody::unit_ball(2).unwrap();
        assert_eq!(disk.boundary_hit(&dvector![0.0, 0.0], &dvector![1.0, 0.0]).unwrap(), 1.0);
        assert_relative_eq!(
            disk.boundary_hit(&dvector![0.5, 0.0], &dvector![1.0, 0.0]).unwrap(),
            0.5,
            max_relative = 1e-15
        );
        // min over faces of (b - <n,p>)/<n,u> = min(1/1, 1/1)
        assert_eq!(square().boundary_hit(&dvector![0.0, 0.0], &dvector![1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn boundary_hit_errors() {
        let disk = ConvexBody::unit_ball(2).unwrap();
        assert_eq!(disk.boundary_hit(&dvector![2.0, 0.0], &dvector![1.0, 0.0]), Err(GeometryError::NotInDomain));
        assert_eq!(disk.boundary_hit(&dvector![0.0, 0.0], &dvector![0.0, 0.0]), Err(GeometryError::ZeroDirection));
        // Non-convex, unbounded sublevel set: rays escape the enclosing ball.
        let hyper = ConvexBody::smooth(
            DefiningFunction::Polynomial {
                terms: vec![
                    Monomial { coef: 1.0, powers: vec![2, 0] },
                    Monomial { coef: -1.0, powers: vec![0, 2] },
                    Monomial { coef: -1.0, powers: vec![0, 0] },
                ],
            },
            dvector![0.0, 0.0],
            3.0,
        )
        .unwrap();
        assert_eq!(hyper.boundary_hit(&dvector![0.0, 0.0], &dvector![0.0, 1.0]), Err(GeometryError::BracketFailure));
    }

    #[test]
    fn smooth_hit_matches_closed_form() {
        // phi = x^2 + y^2 - 1 as a polynomial reproduces the unit disk.
        let poly = ConvexBody::smooth(
            DefiningFunction::Polynomial {
                terms: vec![
                    Monomial { coef: 1.0, powers: vec![2, 0] },
                    Monomial { coef: 1.0, powers: vec![0, 2] },
                    Monomial { coef: -1.0, powers: vec![0, 0] },
                ],
            },
            dvector![0.0, 0.0],
            1.5,
        )
        .unwrap();
        let disk = ConvexBody::unit_ball(2).unwrap();
        let p = dvector![0.3, -0.4];
        for k in 0..16 {
            let th = k as f64 * 0.4;
            let u = dvector![th.cos(), th.sin()] * 0.7;
            let t1 = poly.boundary_hit(&p, &u).unwrap();
            let t2 = disk.boundary_hit(&p, &u).unwrap();
            assert_relative_eq!(t1, t2, max_relative = 1e-13);
        }
        // Superellipse along an axis: the exit is exactly at x = 1.
        let se = ConvexBody::superellipse(2, 4.0).unwrap();
        assert_relative_eq!(
            se.boundary_hit(&dvector![0.0, 0.0], &dvector![1.0, 0.0]).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        // Along the diagonal: 2 t^4 = 1.
        assert_relative_eq!(
            se.boundary_hit(&dvector![0.0, 0.0], &dvector![1.0, 1.0]).unwrap(),
            0.5f64.powf(0.25),
            max_relative = 1e-14
        );
    }

    #[test]
    fn chord_examples() {
        let disk = ConvexBody::unit_ball(2).unwrap();
        let c = chord_through(&disk, &dvector![-0.5, 0.0], &dvector![0.5, 0.0]).unwrap();
        assert_relative_eq!(c.a, dvector![-1.0, 0.0], epsilon = 1e-15);
        assert_relative_eq!(c.b, dvector![1.0, 0.0], epsilon = 1e-15);
        let c = chord_through(&disk, &dvector![0.0, 0.0], &dvector![0.0, 0.5]).unwrap();
        assert_relative_eq!(c.a, dvector![0.0, -1.0], epsilon = 1e-15);
        assert_relative_eq!(c.b, dvector![0.0, 1.0], epsilon = 1e-15);
        // (x/2)^2 + y^2 = 1 on the x-axis gives x = +-2.
        let c = chord_through(&ellipse(), &dvector![-1.0, 0.0], &dvector![1.0, 0.0]).unwrap();
        assert_relative_eq!(c.a, dvector![-2.0, 0.0], epsilon = 1e-15);
        assert_relative_eq!(c.b, dvector![2.0, 0.0], epsilon = 1e-15);
    }

    #[test]
    fn chord_errors() {
        let disk = ConvexBody::unit_ball(2).unwrap();
        let o = dvector![0.0, 0.0];
        assert_eq!(chord_through(&disk, &o, &o), Err(GeometryError::CoincidentPoints));
        assert_eq!(chord_through(&disk, &o, &dvector![1.5, 0.0]), Err(GeometryError::NotInDomain));
        let near = dvector![1.0 - 1e-12, 0.0];
        assert!(matches!(chord_through(&disk, &o, &near), Err(GeometryError::TooCloseToBoundary { .. })));
    }

    #[test]
    fn invalid_bodies_rejected() {
        assert!(ConvexBody::ball(dvector![0.0], 1.0).is_err());
        assert!(ConvexBody::ball(dvector![0.0, 0.0], -1.0).is_err());
        assert!(
            ConvexBody::ellipsoid(dvector![0.0, 0.0], DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err()
        );
        // Strip |y| < 1: unbounded along x.
        let strip = vec![
            HalfSpace::new(dvector![0.0, 1.0], 1.0),
            HalfSpace::new(dvector![0.0, -1.0], 1.0),
            HalfSpace::new(dvector![1.0, 1.0], 5.0),
        ];
        assert!(ConvexBody::polytope(strip).is_err());
        let zero = vec![
            HalfSpace::new(dvector![0.0, 0.0], 1.0),
            HalfSpace::new(dvector![1.0, 0.0], 1.0),
            HalfSpace::new(dvector![-1.0, -1.0], 1.0),
        ];
        assert!(ConvexBody::polytope(zero).is_err());
        // Empty: x < 0 and x > 1.
        let empty = vec![
            HalfSpace::new(dvector![1.0, 0.0], 0.0),
            HalfSpace::new(dvector![-1.0, 0.0], -1.0),
            HalfSpace::new(dvector![0.0, 1.0], 1.0),
            HalfSpace::new(dvector![0.0, -1.0], 1.0),
        ];
        assert!(ConvexBody::polytope(empty).is_err());
    }

    #[test]
    fn triangle_bounding_box() {
        let tri = ConvexBody::polytope(vec![
            HalfSpace::new(dvector![-1.0, 0.0], 0.0),
            HalfSpace::new(dvector![0.0, -1.0], 0.0),
            HalfSpace::new(dvector![1.0, 1.0], 1.0),
        ])
        .unwrap();
        let (lo, hi) = tri.bounding_box();
        assert_relative_eq!(lo.clone(), dvector![0.0, 0.0], epsilon = 1e-15);
        assert_relative_eq!(hi.clone(), dvector![1.0, 1.0], epsilon = 1e-15);
        assert_relative_eq!(tri.interior_point().clone(), dvector![1.0 / 3.0, 1.0 / 3.0], epsilon = 1e-15);
    }

    #[test]
    fn validate_examples() {
        let disk = ConvexBody::unit_ball(2).unwrap();
        assert!(validate(&disk, 1000, 1).passed);
        let se = ConvexBody::superellipse(2, 4.0).unwrap();
        let rep = validate(&se, 1000, 1);
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.samples_tested, 1000);

        let hyper = ConvexBody::smooth(
            DefiningFunction::Polynomial {
                terms: vec![
                    Monomial { coef: 1.0, powers: vec![2, 0] },
                    Monomial { coef: -1.0, powers: vec![0, 2] },
                    Monomial { coef: -1.0, powers: vec![0, 0] },
                ],
            },
            dvector![0.0, 0.0],
            3.0,
        )
        .unwrap();
        let rep = validate(&hyper, 1000, 1);
        assert!(!rep.passed);
        let failure = rep.failure.unwrap();
        assert!(!failure.points.is_empty());
        if failure.check == "convexity" {
            let phi = |p: &[f64]| p[0] * p[0] - p[1] * p[1] - 1.0;
            assert!(phi(&failure.points[0]) < 0.0 && phi(&failure.points[1]) < 0.0);
            assert!(phi(&failure.points[2]) >= 0.0);
        }
    }

    #[test]
    fn validate_is_deterministic() {
        let hyper = ConvexBody::smooth(
            DefiningFunction::Polynomial {
                terms: vec![
                    Monomial { coef: 1.0, powers: vec![2, 0] },
                    Monomial { coef: -1.0, powers: vec![0, 2] },
                    Monomial { coef: -1.0, powers: vec![0, 0] },
                ],
            },
            dvector![0.0, 0.0],
            3.0,
        )
        .unwrap();
        assert_eq!(validate(&hyper, 200, 9), validate(&hyper, 200, 9));
    }

    #[test]
    fn polynomial_gradient_matches_finite_difference() {
        let phi = DefiningFunction::Polynomial {
            terms: vec![
                Monomial { coef: 2.0, powers: vec![3, 1] },
                Monomial { coef: -0.5, powers: vec![0, 4] },
                Monomial { coef: 1.0, powers: vec![0, 0] },
            ],
        };
        let x = [0.4, -0.7];
        let mut g = [0.0; 2];
        phi.gradient(&x, &mut g);
        let h = 1e-6;
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (phi.value(&xp) - phi.value(&xm)) / (2.0 * h);
            assert_relative_eq!(g[i], fd, max_relative = 1e-8);
        }
    }
}
