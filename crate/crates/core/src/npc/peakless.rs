//! Pedersen (peakless distance) and convex-capsule conditions.

use std::collections::BTreeMap;

use crate::body::{ConvexBody, Point};
use crate::error::{GeometryError, Result};
use crate::geodesic::{dist_to_geodesic, offset_for_distance, Capsule, GeodesicSegment, DEFAULT_DIST_GRID};
use crate::metric::hilbert_distance;
use crate::npc::{point_at, run_check, CheckParams, CheckReport, CheckerId, Configuration, Inequality, Outcome, Sides};
use crate::sampling::{unit_direction, Region, SampleRng};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PedersenParams {
    /// Number of nodes on `[0, 1]` at which `f(t)` is evaluated (at least 8).
    pub t_grid: usize,
    /// Grid handed to [`dist_to_geodesic`].
    pub dist_grid: usize,
}

impl Default for PedersenParams {
    fn default() -> Self {
        Self { t_grid: 16, dist_grid: DEFAULT_DIST_GRID }
    }
}

/// `f(t) = dist(γ₁, γ₂(t)) <= max(f(0), f(1))` on a grid. Variables:
/// `x1, y1, x2, y2`.
struct Pedersen<'a> {
    body: &'a ConvexBody,
    region: &'a Region,
    params: PedersenParams,
}

impl Pedersen<'_> {
    fn profile(&self, vars: &[f64]) -> Result<Vec<f64>> {
        let n = self.body.dim();
        let g1 = GeodesicSegment::new(self.body, &point_at(vars, 0, n), &point_at(vars, 1, n))?;
        let g2 = GeodesicSegment::new(self.body, &point_at(vars, 2, n), &point_at(vars, 3, n))?;
        let last = (self.params.t_grid - 1) as f64;
        (0..self.params.t_grid)
            .map(|j| dist_to_geodesic(&g1, &g2.eval_affine(j as f64 / last)?, self.params.dist_grid))
            .collect()
    }
}

impl Inequality for Pedersen<'_> {
    fn id(&self) -> CheckerId {
        CheckerId::Pedersen
    }

    fn region(&self) -> &Region {
        self.region
    }

    fn sample(&self, rng: &mut SampleRng) -> Result<Vec<f64>> {
        let mut vars = Vec::with_capacity(4 * self.body.dim());
        for _ in 0..4 {
            vars.extend_from_slice(self.region.sample(self.body, rng)?.as_slice());
        }
        Ok(vars)
    }

    fn evaluate(&self, vars: &[f64]) -> Result<Outcome> {
        let f = self.profile(vars)?;
        let ends = f[0].max(f[f.len() - 1]);
        let peak = f[1..f.len() - 1].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Outcome::Evaluated(Sides { lhs: peak, rhs: ends }))
    }

    fn describe(&self, vars: &[f64]) -> Configuration {
        let n = self.body.dim();
        let mut c = Configuration::default();
        for (i, name) in ["x1", "y1", "x2", "y2"].into_iter().enumerate() {
            c = c.point(name, &vars[i * n..(i + 1) * n]);
        }
        c
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("t_grid".to_owned(), self.params.t_grid as f64),
            ("dist_grid".to_owned(), self.params.dist_grid as f64),
        ])
    }
}

/// Quasiconvexity of `t -> dist(γ₁, γ₂(t))` on sampled pairs of segments.
pub fn pedersen_check(
    body: &ConvexBody,
    region: &Region,
    params: &CheckParams,
    pedersen: PedersenParams,
) -> Result<CheckReport> {
    if pedersen.t_grid < 8 {
        return Err(GeometryError::OutOfRange { what: "pedersen t_grid", value: pedersen.t_grid as f64 });
    }
    run_check(&Pedersen { body, region, params: pedersen }, params)
}

/// Interior chord points probed between the two capsule points.
const CHORD_PROBES: usize = 8;

/// Convexity of `C_γ(α)`: chord points between two capsule members stay within
/// `α` of `γ`. Variables: `x, y, α, q1, q2`; with a fixed capsule only `q1, q2`
/// are sampled.
struct CapsuleConvexity<'a> {
    body: &'a ConvexBody,
    region: &'a Region,
    fixed: Option<(Point, Point, f64)>,
}

impl CapsuleConvexity<'_> {
    /// Point at Hilbert distance `r` from a random arclength point of `seg`.
    fn capsule_point(&self, seg: &GeodesicSegment<'_>, alpha: f64, rng: &mut SampleRng) -> Result<Point> {
        let base = seg.eval_arclength(rng.random_range(0.0..=1.0) * seg.length())?;
        let r = rng.random_range(0.0..=1.0) * alpha;
        if r == 0.0 {
            return Ok(base);
        }
        let u = unit_direction(rng, self.body.dim());
        let forward = self.body.boundary_hit(&base, &u)?;
        let back = self.body.boundary_hit(&base, &-&u)?;
        Ok(&base + offset_for_distance(back, back + forward, r) * u)
    }
}

impl Inequality for CapsuleConvexity<'_> {
    fn id(&self) -> CheckerId {
        CheckerId::Capsule
    }

    fn region(&self) -> &Region {
        self.region
    }

    fn sample(&self, rng: &mut SampleRng) -> Result<Vec<f64>> {
        let (x, y, alpha) = match &self.fixed {
            Some((x, y, a)) => (x.clone(), y.clone(), *a),
            None => {
                let half = Region::hilbert_ball(&self.region.center_point(), 0.5 * self.region.radius);
                let x = half.sample(self.body, rng)?;
                let y = half.sample(self.body, rng)?;
                (x, y, rng.random_range(0.0..=0.5 * self.region.radius))
            }
        };
        let seg = GeodesicSegment::new(self.body, &x, &y)?;
        let q1 = self.capsule_point(&seg, alpha, rng)?;
        let q2 = self.capsule_point(&seg, alpha, rng)?;
        let mut vars: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
        vars.push(alpha);
        vars.extend(q1.iter().chain(q2.iter()));
        Ok(vars)
    }

    fn evaluate(&self, vars: &[f64]) -> Result<Outcome> {
        let n = self.body.dim();
        let (x, y, alpha) = (point_at(vars, 0, n), point_at(vars, 1, n), vars[2 * n]);
        let q1 = Point::from_column_slice(&vars[2 * n + 1..3 * n + 1]);
        let q2 = Point::from_column_slice(&vars[3 * n + 1..4 * n + 1]);
        let seg = GeodesicSegment::new(self.body, &x, &y)?;
        let mut worst = f64::NEG_INFINITY;
        for k in 1..=CHORD_PROBES {
            let t = k as f64 / (CHORD_PROBES + 1) as f64;
            let p = &q1 * (1.0 - t) + &q2 * t;
            worst = worst.max(dist_to_geodesic(&seg, &p, DEFAULT_DIST_GRID)?);
        }
        Ok(Outcome::Evaluated(Sides { lhs: worst, rhs: alpha }))
    }

    fn describe(&self, vars: &[f64]) -> Configuration {
        let n = self.body.dim();
        Configuration::default()
            .point("x", &vars[0..n])
            .point("y", &vars[n..2 * n])
            .point("q1", &vars[2 * n + 1..3 * n + 1])
            .point("q2", &vars[3 * n + 1..4 * n + 1])
            .param("alpha", vars[2 * n])
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("chord_probes".to_owned(), CHORD_PROBES as f64)])
    }
}

/// Geodesic convexity of a fixed capsule, probed on sampled member pairs.
///
/// The capsule is admissible when `max(d(c, x), d(c, y)) + α <= R` for the
/// region's center `c` and radius `R`, which keeps every capsule point in the
/// region.
pub fn capsule_check(
    body: &ConvexBody,
    capsule: &Capsule<'_>,
    region: &Region,
    params: &CheckParams,
) -> Result<CheckReport> {
    let seg = &capsule.segment;
    let c = region.center_point();
    let reach = hilbert_distance(body, &c, seg.start())?.max(hilbert_distance(body, &c, seg.end())?);
    if reach + capsule.alpha > region.radius {
        return Err(GeometryError::InadmissibleCapsule);
    }
    let fixed = Some((seg.start().clone(), seg.end().clone(), capsule.alpha));
    run_check(&CapsuleConvexity { body, region, fixed }, params)
}

/// Capsule convexity over random admissible capsules: endpoints in the region's
/// half-radius ball and `α` uniform in `[0, R/2]`.
pub fn random_capsule_check(body: &ConvexBody, region: &Region, params: &CheckParams) -> Result<CheckReport> {
    run_check(&CapsuleConvexity { body, region, fixed: None }, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn disk() -> ConvexBody {
        ConvexBody::unit_ball(2).unwrap()
    }

    #[test]
    fn repeated_point_on_first_segment_is_flat() {
        let b = disk();
        let r = Region::default_for(&b);
        let ineq = Pedersen { body: &b, region: &r, params: PedersenParams::default() };
        let f = ineq.profile(&[-0.5, 0.0, 0.5, 0.0, 0.2, 0.0, 0.2, 0.0]).unwrap();
        assert!(f.iter().all(|&v| v == f[0] && v < 1e-12));
    }

    #[test]
    fn disk_is_peakless() {
        let b = disk();
        let rep =
            pedersen_check(&b, &Region::default_for(&b), &CheckParams::new(100, 5, 1e-9), PedersenParams::default())
                .unwrap();
        assert!(rep.passed(), "{:?}", rep.violations.first());
        assert!(pedersen_check(
            &b,
            &Region::default_for(&b),
            &CheckParams::new(1, 5, 1e-9),
            PedersenParams { t_grid: 4, dist_grid: 64 }
        )
        .is_err());
    }

    #[test]
    fn capsule_points_are_within_alpha() {
        let b = disk();
        let r = Region::default_for(&b);
        let ineq = CapsuleConvexity { body: &b, region: &r, fixed: None };
        let mut rng = crate::sampling::substream(3, 0);
        let seg = GeodesicSegment::new(&b, &dvector![-0.3, 0.1], &dvector![0.4, 0.2]).unwrap();
        for _ in 0..50 {
            let q = ineq.capsule_point(&seg, 0.5, &mut rng).unwrap();
            assert!(dist_to_geodesic(&seg, &q, 64).unwrap() <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn disk_capsules_are_convex() {
        let b = disk();
        let r = Region::default_for(&b);
        let p = CheckParams::new(200, 7, 1e-9);
        let seg = GeodesicSegment::new(&b, &dvector![-0.7, 0.0], &dvector![0.7, 0.0]).unwrap();
        assert!(capsule_check(&b, &Capsule::new(seg.clone(), 0.5).unwrap(), &r, &p).unwrap().passed());
        assert!(capsule_check(&b, &Capsule::new(seg, 0.0).unwrap(), &r, &p).unwrap().passed());
        assert!(random_capsule_check(&b, &r, &p).unwrap().passed());
    }

    #[test]
    fn inadmissible_capsule_is_rejected() {
        let b = disk();
        let seg = GeodesicSegment::new(&b, &dvector![-0.7, 0.0], &dvector![0.7, 0.0]).unwrap();
        let cap = Capsule::new(seg, 1.5).unwrap();
        let err = capsule_check(&b, &cap, &Region::default_for(&b), &CheckParams::new(10, 0, 1e-9));
        assert_eq!(err.unwrap_err(), GeometryError::InadmissibleCapsule);
    }
}
