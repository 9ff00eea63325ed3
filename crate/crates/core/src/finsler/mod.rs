//! Numerical Finsler geometry of the Hilbert–Finsler norm `F = F_K`.
//!
//! Everything is built from `F²` by nested fourth-order central differences:
//!
//! - fundamental tensor `g_ij = ½ ∂²F²/∂y^i∂y^j`,
//! - geodesic spray `G^i = ¼ g^{il} [(F²)_{x^k y^l} y^k − (F²)_{x^l}]`,
//! - spray curvature
//!   `R^i_k = 2 ∂G^i/∂x^k − y^j ∂²G^i/∂x^j∂y^k + 2 G^j ∂²G^i/∂y^j∂y^k − ∂G^i/∂y^j ∂G^j/∂y^k`,
//! - flag curvature `κ(y, V) = g(R V, V) / (g(y,y) g(V,V) − g(y,V)²)`,
//! - Berwald defect: the largest third fiber derivative of `G`, which vanishes
//!   exactly when the spray is quadratic in `y`.
//!
//! Polytopes are rejected: their norm is not smooth across face transitions.

pub mod diff;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::body::{ConvexBody, Point, Vector};
use crate::error::{GeometryError, Result};
use crate::metric::hilbert_norm;
use crate::sampling;
use diff::Vec64;

/// Relative finite-difference steps. Fiber steps scale with `|y|`, base steps
/// with [`ConvexBody::scale`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DifferenceSteps {
    /// Fiber step of the fundamental tensor.
    pub tensor_fiber: f64,
    /// Fiber step of the spray when evaluated directly (spray, spray geodesics).
    pub spray_fiber: f64,
    /// Base step of the spray when evaluated directly.
    pub spray_base: f64,
    /// Fiber step of the spray when it is differentiated again (curvature,
    /// Berwald defect); larger than `spray_fiber` to keep rounding noise down.
    pub nested_spray_fiber: f64,
    /// Base step of the spray when it is differentiated again.
    pub nested_spray_base: f64,
    /// Fiber step for derivatives of the spray (curvature).
    pub curvature_fiber: f64,
    /// Base step for derivatives of the spray (curvature).
    pub curvature_base: f64,
    /// Fiber step of the third-derivative Berwald stencil.
    pub berwald_fiber: f64,
}

impl Default for DifferenceSteps {
    fn default() -> Self {
        Self {
            tensor_fiber: 1e-3,
            spray_fiber: 1e-3,
            spray_base: 1e-3,
            nested_spray_fiber: 5e-3,
            nested_spray_base: 3e-3,
            curvature_fiber: 1.5e-2,
            curvature_base: 5e-3,
            berwald_fiber: 5e-2,
        }
    }
}

/// `g_ij(x, y)`, symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTensor {
    pub x: Point,
    pub y: Vector,
    pub g: DMatrix<f64>,
    pub step: f64,
}

impl FundamentalTensor {
    pub fn inner(&self, u: &Vector, v: &Vector) -> f64 {
        u.dot(&(&self.g * v))
    }
}

/// Spray coefficients `G^i(x, y)` with the steps used to compute them.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayField {
    pub x: Point,
    pub y: Vector,
    pub coefficients: Vector,
    pub fiber_step: f64,
    pub base_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagCurvatureSample {
    pub x: Vec<f64>,
    pub pole: Vec<f64>,
    pub edge: Vec<f64>,
    pub kappa: f64,
}

/// Finite-difference evaluator bound to one smooth body.
#[derive(Debug, Clone)]
pub struct FinslerProbe<'a> {
    body: &'a ConvexBody,
    steps: DifferenceSteps,
}

impl<'a> FinslerProbe<'a> {
    pub fn new(body: &'a ConvexBody) -> Result<Self> {
        if body.is_polytope() {
            return Err(GeometryError::NonSmoothBody);
        }
        Ok(Self { body, steps: DifferenceSteps::default() })
    }

    pub fn with_steps(mut self, steps: DifferenceSteps) -> Self {
        self.steps = steps;
        self
    }

    pub fn steps(&self) -> &DifferenceSteps {
        &self.steps
    }

    pub fn body(&self) -> &'a ConvexBody {
        self.body
    }

    fn check(&self, x: &Point, y: &Vector) -> Result<()> {
        self.body.check_point(x)?;
        if y.len() != self.body.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.body.dim(), found: y.len() });
        }
        if !self.body.contains_unchecked(x) {
            return Err(GeometryError::NotInDomain);
        }
        if y.norm() == 0.0 {
            return Err(GeometryError::ZeroDirection);
        }
        Ok(())
    }

    fn base_step(&self, rel: f64) -> f64 {
        rel * self.body.scale()
    }

    fn f2(&self, x: &Point, y: &Vector) -> Result<f64> {
        let f = hilbert_norm(self.body, x, y)?;
        Ok(f * f)
    }

    fn metric_matrix(&self, x: &Point, y: &Vector, rel: f64) -> Result<DMatrix<f64>> {
        let half_f2 = |v: &Vec64| Ok(DVector::from_element(1, 0.5 * self.f2(x, v)?));
        let g = diff::scalar_hessian(&half_f2, y, rel * y.norm())?;
        Ok((&g + g.transpose()) * 0.5)
    }

    /// `g_ij = ½ ∂²F²/∂y^i∂y^j` at `(x, y)`.
    pub fn fundamental_tensor(&self, x: &Point, y: &Vector) -> Result<FundamentalTensor> {
        self.check(x, y)?;
        let g = self.metric_matrix(x, y, self.steps.tensor_fiber)?;
        if g.clone().cholesky().is_none() {
            return Err(GeometryError::NotPositiveDefinite);
        }
        Ok(FundamentalTensor { x: x.clone(), y: y.clone(), g, step: self.steps.tensor_fiber * y.norm() })
    }

    fn spray_vector(&self, x: &Point, y: &Vector, nested: bool) -> Result<Vector> {
        let n = x.len();
        let (fiber, base) = if nested {
            (self.steps.nested_spray_fiber, self.steps.nested_spray_base)
        } else {
            (self.steps.spray_fiber, self.steps.spray_base)
        };
        let hy = fiber * y.norm();
        let hx = self.base_step(base);
        let g = self.metric_matrix(x, y, fiber)?;

        // Σ_k (F²)_{x^k y^l} y^k = ∂/∂y^l of the x-derivative of F² along the fixed direction y.
        let along = y.clone();
        let dx_along = |v: &Vec64| {
            let f = |p: &Vec64| Ok(DVector::from_element(1, self.f2(p, v)?));
            diff::first(&f, x, &along, hx / along.norm())
        };
        let mixed = diff::gradient(&dx_along, y, hy)?;
        let base = |p: &Vec64| Ok(DVector::from_element(1, self.f2(p, y)?));
        let grad_x = diff::gradient(&base, x, hx)?;
        let rhs = DVector::from_fn(n, |l, _| mixed[l][0] - grad_x[l][0]);
        let chol = g.cholesky().ok_or(GeometryError::NotPositiveDefinite)?;
        Ok(chol.solve(&rhs) * 0.25)
    }

    /// Spray coefficients `G^i(x, y)`.
    pub fn spray(&self, x: &Point, y: &Vector) -> Result<SprayField> {
        self.check(x, y)?;
        Ok(SprayField {
            x: x.clone(),
            y: y.clone(),
            coefficients: self.spray_vector(x, y, false)?,
            fiber_step: self.steps.spray_fiber * y.norm(),
            base_step: self.base_step(self.steps.spray_base),
        })
    }

    /// Curvature operator `R^i_k(x, y)` of the spray (row `i`, column `k`).
    pub fn riemann_curvature(&self, x: &Point, y: &Vector) -> Result<DMatrix<f64>> {
        self.check(x, y)?;
        let n = x.len();
        let hy = self.steps.curvature_fiber * y.norm();
        let hx = self.base_step(self.steps.curvature_base);

        let g0 = self.spray_vector(x, y, true)?;
        let in_base = |p: &Vec64| self.spray_vector(p, y, true);
        let in_fiber = |v: &Vec64| self.spray_vector(x, v, true);
        let dgdx = diff::gradient(&in_base, x, hx)?;
        let dgdy = diff::gradient(&in_fiber, y, hy)?;
        let hyy = diff::hessian(&in_fiber, y, hy)?;
        // y^j ∂²G/∂x^j∂y^k: fiber gradient of the base derivative along fixed y.
        let along = y.clone();
        let ynorm = y.norm();
        let dx_along = |v: &Vec64| {
            let f = |p: &Vec64| self.spray_vector(p, v, true);
            diff::first(&f, x, &along, hx / ynorm)
        };
        let mixed = diff::gradient(&dx_along, y, hy)?;

        Ok(DMatrix::from_fn(n, n, |i, k| {
            let mut r = 2.0 * dgdx[k][i] - mixed[k][i];
            for j in 0..n {
                r += 2.0 * g0[j] * hyy[j][k][i] - dgdy[j][i] * dgdy[k][j];
            }
            r
        }))
    }

    /// Flag curvature with pole `y` and transverse edge `v`.
    pub fn flag_curvature(&self, x: &Point, y: &Vector, v: &Vector) -> Result<f64> {
        self.check(x, y)?;
        if v.len() != y.len() {
            return Err(GeometryError::DimensionMismatch { expected: y.len(), found: v.len() });
        }
        let g = self.fundamental_tensor(x, y)?;
        let gyy = g.inner(y, y);
        let gvv = g.inner(v, v);
        let gyv = g.inner(y, v);
        let gram = gyy * gvv - gyv * gyv;
        if !(gram > 1e-10 * gyy * gvv) {
            return Err(GeometryError::CollinearFlag);
        }
        let r = self.riemann_curvature(x, y)?;
        Ok(g.inner(&(r * v), v) / gram)
    }

    pub fn flag_curvature_sample(&self, x: &Point, y: &Vector, v: &Vector) -> Result<FlagCurvatureSample> {
        Ok(FlagCurvatureSample {
            x: x.as_slice().to_vec(),
            pole: y.as_slice().to_vec(),
            edge: v.as_slice().to_vec(),
            kappa: self.flag_curvature(x, y, v)?,
        })
    }

    /// Largest `|∂³G^i/∂y^j∂y^k∂y^l|` over `fiber_samples` random unit fibers at `x`.
    pub fn berwald_defect(&self, x: &Point, fiber_samples: usize, seed: u64) -> Result<f64> {
        self.body.check_point(x)?;
        if !self.body.contains_unchecked(x) {
            return Err(GeometryError::NotInDomain);
        }
        if fiber_samples == 0 {
            return Err(GeometryError::OutOfRange { what: "fiber_samples", value: 0.0 });
        }
        let n = x.len();
        let h = self.steps.berwald_fiber;
        let mut defect = 0.0f64;
        for s in 0..fiber_samples {
            let mut rng = sampling::substream(seed, s as u64);
            let y = sampling::unit_direction(&mut rng, n);
            let in_fiber = |v: &Vec64| self.spray_vector(x, v, true);
            let flat_hessian = |v: &Vec64| {
                let hs = diff::hessian(&in_fiber, v, h)?;
                Ok(DVector::from_iterator(
                    n * n * n,
                    hs.into_iter().flatten().flat_map(|v| v.iter().copied().collect::<Vec<_>>()),
                ))
            };
            for col in diff::gradient(&flat_hessian, &y, h)? {
                defect = defect.max(col.amax());
            }
        }
        Ok(defect)
    }

    /// Integrate `x'' = −2 G(x, x')` with classical RK4 from `(x0, y0)` over unit
    /// time, with `y0` rescaled so that `F(x0, y0) = length`.
    pub fn spray_geodesic(&self, x0: &Point, y0: &Vector, length: f64, steps: usize) -> Result<SprayGeodesic> {
        self.check(x0, y0)?;
        if steps == 0 {
            return Err(GeometryError::OutOfRange { what: "integration steps", value: 0.0 });
        }
        let speed = hilbert_norm(self.body, x0, y0)?;
        let v0 = y0 * (length / speed);
        let dir = &v0 / v0.norm();
        let dt = 1.0 / steps as f64;
        let accel = |p: &Vector, v: &Vector| self.spray_vector(p, v, false).map(|g| g * -2.0);

        let mut x = x0.clone();
        let mut v = v0.clone();
        let mut points = vec![x.clone()];
        let mut deviation = 0.0f64;
        for _ in 0..steps {
            let k1x = v.clone();
            let k1v = accel(&x, &v)?;
            let x2 = &x + &k1x * (0.5 * dt);
            let v2 = &v + &k1v * (0.5 * dt);
            let k2v = accel(&x2, &v2)?;
            let x3 = &x + &v2 * (0.5 * dt);
            let v3 = &v + &k2v * (0.5 * dt);
            let k3v = accel(&x3, &v3)?;
            let x4 = &x + &v3 * dt;
            let v4 = &v + &k3v * dt;
            let k4v = accel(&x4, &v4)?;
            x += (k1x + &v2 * 2.0 + &v3 * 2.0 + &v4) * (dt / 6.0);
            v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
            let w = &x - x0;
            deviation = deviation.max((&w - w.dot(&dir) * &dir).norm());
            points.push(x.clone());
        }
        Ok(SprayGeodesic { points, final_velocity: v, max_deviation: deviation })
    }
}

/// Numerically integrated spray geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayGeodesic {
    pub points: Vec<Point>,
    pub final_velocity: Vector,
    /// Largest Euclidean distance from the straight line through the start point
    /// in the initial direction.
    pub max_deviation: f64,
}

pub fn fundamental_tensor(body: &ConvexBody, x: &Point, y: &Vector) -> Result<FundamentalTensor> {
    FinslerProbe::new(body)?.fundamental_tensor(x, y)
}

pub fn spray(body: &ConvexBody, x: &Point, y: &Vector) -> Result<SprayField> {
    FinslerProbe::new(body)?.spray(x, y)
}

pub fn berwald_defect(body: &ConvexBody, x: &Point, fiber_samples: usize, seed: u64) -> Result<f64> {
    FinslerProbe::new(body)?.berwald_defect(x, fiber_samples, seed)
}

pub fn riemann_curvature(body: &ConvexBody, x: &Point, y: &Vector) -> Result<DMatrix<f64>> {
    FinslerProbe::new(body)?.riemann_curvature(x, y)
}

pub fn flag_curvature(body: &ConvexBody, x: &Point, y: &Vector, v: &Vector) -> Result<f64> {
    FinslerProbe::new(body)?.flag_curvature(x, y, v)
}

/// Flag curvature on a deterministic grid, with `flags` random pole/edge pairs
/// shared by every basepoint. Samples are in grid order.
///
/// Basepoints come from the uniform grid `w` with `per_axis` nodes per axis on
/// `[-1, 1]^n`, mapped radially by the body's gauge about its interior point
/// `c`: `p = c + fraction * |w|_inf * t*(c, w/|w|) * w/|w|`, so the outer ring
/// lies on the homothetic copy `c + fraction * (∂K - c)`.
pub fn curvature_grid(
    probe: &FinslerProbe<'_>,
    per_axis: usize,
    fraction: f64,
    flags: usize,
    seed: u64,
) -> Result<Vec<FlagCurvatureSample>> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(GeometryError::OutOfRange { what: "grid fraction", value: fraction });
    }
    let body = probe.body();
    let n = body.dim();
    let c = body.interior_point();
    let node = |k: usize| if per_axis <= 1 { 0.0 } else { -1.0 + 2.0 * k as f64 / (per_axis - 1) as f64 };
    let basepoints: Vec<Point> = (0..per_axis.pow(n as u32))
        .map(|mut idx| {
            let mut w = DVector::zeros(n);
            for i in 0..n {
                w[i] = node(idx % per_axis);
                idx /= per_axis;
            }
            let len = w.norm();
            if len == 0.0 {
                return Ok(c.clone());
            }
            let u = w / len;
            Ok(c + &u * (fraction * u.amax() * len * body.boundary_hit(c, &u)?))
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(Vector, Vector)> = (0..flags)
        .map(|k| {
            let mut rng = sampling::substream(seed, k as u64);
            (sampling::unit_direction(&mut rng, n), sampling::unit_direction(&mut rng, n))
        })
        .collect();
    let jobs: Vec<(&Point, &(Vector, Vector))> =
        basepoints.iter().flat_map(|p| pairs.iter().map(move |f| (p, f))).collect();
    jobs.par_iter().map(|(x, (y, v))| probe.flag_curvature_sample(x, y, v)).collect()
}

/// Basepoints, as leading coordinates padded with zeros, at which the unit ball
/// calibrates the Berwald noise floor.
pub const CALIBRATION_POINTS: [[f64; 2]; 5] = [[0.3, 0.2], [-0.4, 0.1], [0.1, -0.5], [0.45, 0.35], [-0.2, -0.3]];

/// Calibration point `i` embedded in `R^dim`.
pub fn calibration_point(i: usize, dim: usize) -> Point {
    DVector::from_fn(dim, |j, _| CALIBRATION_POINTS[i].get(j).copied().unwrap_or(0.0))
}

/// Largest Berwald defect of the unit ball in `R^dim` over the calibration
/// points: the finite-difference noise floor of a Riemannian (Berwald) metric.
pub fn berwald_noise_floor(dim: usize, fiber_samples: usize, seed: u64, steps: DifferenceSteps) -> Result<f64> {
    let ball = ConvexBody::unit_ball(dim)?;
    let probe = FinslerProbe::new(&ball)?.with_steps(steps);
    (0..CALIBRATION_POINTS.len())
        .into_par_iter()
        .map(|i| probe.berwald_defect(&calibration_point(i, dim), fiber_samples, seed))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::metric::hilbert_distance;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    #[test]
    fn tensor_at_disk_center_is_identity() {
        let b = catalog::disk();
        let t = fundamental_tensor(&b, &dvector![0.0, 0.0], &dvector![0.3, -0.7]).unwrap();
        assert_relative_eq!(t.g, DMatrix::identity(2, 2), epsilon = 1e-7);
    }

    #[test]
    fn tensor_matches_klein_metric() {
        let b = catalog::disk();
        let x = dvector![0.5, 0.0];
        let t = fundamental_tensor(&b, &x, &dvector![1.0, 0.0]).unwrap();
        assert_relative_eq!(t.g, DMatrix::from_diagonal(&dvector![16.0 / 9.0, 4.0 / 3.0]), epsilon = 1e-7);
        let t2 = fundamental_tensor(&b, &x, &dvector![2.0, 0.0]).unwrap();
        assert_relative_eq!(t.g, t2.g, epsilon = 1e-6);
    }

    #[test]
    fn tensor_is_zero_homogeneous_on_superellipse() {
        let b = catalog::superellipse();
        let (x, y) = (dvector![0.3, 0.2], dvector![0.6, -0.4]);
        let g1 = fundamental_tensor(&b, &x, &y).unwrap().g;
        let g2 = fundamental_tensor(&b, &x, &(&y * 2.0)).unwrap().g;
        assert_relative_eq!(g1, g2, epsilon = 1e-6);
        assert!((&g1 - g1.transpose()).amax() < 1e-8);
    }

    #[test]
    fn spray_oracles() {
        let b = catalog::disk();
        let g0 = spray(&b, &dvector![0.0, 0.0], &dvector![0.4, 0.9]).unwrap();
        assert!(g0.coefficients.amax() < 1e-6);
        let g = spray(&b, &dvector![0.5, 0.0], &dvector![1.0, 0.0]).unwrap();
        assert_relative_eq!(g.coefficients[0], 2.0 / 3.0, epsilon = 1e-6);
        assert!(g.coefficients[1].abs() < 1e-6);

        let s = catalog::superellipse();
        let (x, y) = (dvector![0.3, 0.2], dvector![0.6, -0.4]);
        let a = spray(&s, &x, &y).unwrap().coefficients;
        let a2 = spray(&s, &x, &(&y * 2.0)).unwrap().coefficients;
        assert!((&a2 - &a * 4.0).norm() <= 1e-5 * a2.norm());
    }

    #[test]
    fn curvature_identities() {
        let b = catalog::ellipse();
        let (x, y) = (dvector![0.4, -0.3], dvector![0.8, 0.5]);
        let r = riemann_curvature(&b, &x, &y).unwrap();
        assert!((&r * &y).norm() <= 1e-4 * r.norm() * y.norm());
        let r3 = riemann_curvature(&b, &x, &(&y * 3.0)).unwrap();
        assert!((&r3 - &r * 9.0).norm() <= 1e-4 * r3.norm());

        let v = dvector![-0.2, 1.0];
        let k = flag_curvature(&b, &x, &y, &v).unwrap();
        assert_relative_eq!(k, -1.0, epsilon = 5e-3);
        for (yy, vv) in [(&y * 2.0, v.clone()), (y.clone(), &v * -3.0), (y.clone(), &v + &y * 0.7)] {
            assert_relative_eq!(flag_curvature(&b, &x, &yy, &vv).unwrap(), k, epsilon = 1e-4);
        }
        assert_eq!(flag_curvature(&b, &x, &y, &(&y * 2.0)).unwrap_err(), GeometryError::CollinearFlag);
    }

    #[test]
    fn disk_center_curvature_is_minus_one() {
        let b = catalog::disk();
        let k = flag_curvature(&b, &dvector![0.0, 0.0], &dvector![1.0, 0.0], &dvector![0.0, 1.0]).unwrap();
        assert_relative_eq!(k, -1.0, epsilon = 5e-3);
    }

    #[test]
    fn berwald_defect_separates_ellipse_from_superellipse() {
        let x = dvector![0.3, 0.2];
        let disk = berwald_defect(&catalog::disk(), &x, 4, 1).unwrap();
        let sup = berwald_defect(&catalog::superellipse(), &x, 4, 1).unwrap();
        assert!(disk < 1e-3, "{disk}");
        assert!(sup > 10.0 * disk, "{sup} vs {disk}");
    }

    #[test]
    fn spray_geodesics_are_straight() {
        let b = catalog::superellipse();
        let probe = FinslerProbe::new(&b).unwrap();
        let geo = probe.spray_geodesic(&dvector![0.1, -0.2], &dvector![0.6, 0.8], 1.0, 64).unwrap();
        assert!(geo.max_deviation < 1e-5, "{}", geo.max_deviation);
        let end = geo.points.last().unwrap();
        let len = hilbert_distance(&b, &dvector![0.1, -0.2], end).unwrap();
        assert_relative_eq!(len, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn polytopes_are_rejected() {
        let b = catalog::square();
        assert_eq!(FinslerProbe::new(&b).unwrap_err(), GeometryError::NonSmoothBody);
    }
}
