//! Alexandrov (CAT(0)) and Busemann comparison inequalities.

use std::collections::BTreeMap;

use crate::body::{ConvexBody, Point};
use crate::error::{GeometryError, Result};
use crate::geodesic::{midpoint, GeodesicSegment};
use crate::metric::hilbert_distance;
use crate::npc::{point_at, run_check, CheckParams, CheckReport, CheckerId, Configuration, Inequality, Outcome, Sides};
use crate::sampling::{Region, SampleRng};
use rand::Rng;

/// Initial refinement step as a fraction of the body scale.
const REFINE_STEP: f64 = 0.05;

struct Triple<'a> {
    body: &'a ConvexBody,
    region: &'a Region,
}

impl Triple<'_> {
    fn points_in_region(&self, vars: &[f64], count: usize) -> Option<Vec<Point>> {
        let n = self.body.dim();
        let pts: Vec<_> = (0..count).map(|i| point_at(vars, i, n)).collect();
        pts.iter().all(|p| self.region.contains(self.body, p)).then_some(pts)
    }

    fn sample_points(&self, rng: &mut SampleRng, count: usize) -> Result<Vec<f64>> {
        let mut vars = Vec::with_capacity(count * self.body.dim() + 1);
        for _ in 0..count {
            vars.extend_from_slice(self.region.sample(self.body, rng)?.as_slice());
        }
        Ok(vars)
    }
}

/// `d²(y, γ(t)) <= (1-t) d²(y, x) + t d²(y, z) - t(1-t) d²(x, z)` with `γ` the
/// constant-speed chord from `x` to `z`. Variables: `x, y, z, t`.
struct Alexandrov<'a>(Triple<'a>);

impl Inequality for Alexandrov<'_> {
    fn id(&self) -> CheckerId {
        CheckerId::Alexandrov
    }

    fn region(&self) -> &Region {
        self.0.region
    }

    fn sample(&self, rng: &mut SampleRng) -> Result<Vec<f64>> {
        let mut vars = self.0.sample_points(rng, 3)?;
        vars.push(rng.random_range(0.0..=1.0));
        Ok(vars)
    }

    fn evaluate(&self, vars: &[f64]) -> Result<Outcome> {
        let t = vars[vars.len() - 1];
        if !(0.0..=1.0).contains(&t) {
            return Ok(Outcome::Infeasible);
        }
        let Some(pts) = self.0.points_in_region(vars, 3) else {
            return Ok(Outcome::Infeasible);
        };
        let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
        let body = self.0.body;
        let seg = GeodesicSegment::new(body, x, z)?;
        let g = seg.eval_unit(t)?;
        let dyg = hilbert_distance(body, y, &g)?;
        let dyx = hilbert_distance(body, y, x)?;
        let dyz = hilbert_distance(body, y, z)?;
        let dxz = seg.length();
        Ok(Outcome::Evaluated(Sides {
            lhs: dyg * dyg,
            rhs: (1.0 - t) * dyx * dyx + t * dyz * dyz - t * (1.0 - t) * dxz * dxz,
        }))
    }

    fn describe(&self, vars: &[f64]) -> Configuration {
        let n = self.0.body.dim();
        Configuration::default()
            .point("x", &vars[0..n])
            .point("y", &vars[n..2 * n])
            .point("z", &vars[2 * n..3 * n])
            .param("t", vars[3 * n])
    }

    fn refine_step(&self) -> Option<f64> {
        Some(REFINE_STEP * self.0.body.scale())
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("units_squared".to_owned(), 1.0)])
    }
}

/// `d(m(x, y), m(x, z)) <= d(y, z) / 2`. Variables: `x, y, z`.
struct Busemann<'a>(Triple<'a>);

impl Inequality for Busemann<'_> {
    fn id(&self) -> CheckerId {
        CheckerId::Busemann
    }

    fn region(&self) -> &Region {
        self.0.region
    }

    fn sample(&self, rng: &mut SampleRng) -> Result<Vec<f64>> {
        self.0.sample_points(rng, 3)
    }

    fn evaluate(&self, vars: &[f64]) -> Result<Outcome> {
        let Some(pts) = self.0.points_in_region(vars, 3) else {
            return Ok(Outcome::Infeasible);
        };
        let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
        let body = self.0.body;
        let mxy = midpoint(body, x, y)?;
        let mxz = midpoint(body, x, z)?;
        Ok(Outcome::Evaluated(Sides {
            lhs: hilbert_distance(body, &mxy, &mxz)?,
            rhs: 0.5 * hilbert_distance(body, y, z)?,
        }))
    }

    fn describe(&self, vars: &[f64]) -> Configuration {
        let n = self.0.body.dim();
        Configuration::default().point("x", &vars[0..n]).point("y", &vars[n..2 * n]).point("z", &vars[2 * n..3 * n])
    }

    fn refine_step(&self) -> Option<f64> {
        Some(REFINE_STEP * self.0.body.scale())
    }
}

/// Alexandrov non-positive curvature inequality on sampled triples and times
/// (squared Hilbert units).
pub fn alexandrov_check(body: &ConvexBody, region: &Region, params: &CheckParams) -> Result<CheckReport> {
    run_check(&Alexandrov(Triple { body, region }), params)
}

/// Busemann midpoint inequality on sampled triples (Hilbert units).
pub fn busemann_check(body: &ConvexBody, region: &Region, params: &CheckParams) -> Result<CheckReport> {
    run_check(&Busemann(Triple { body, region }), params)
}

/// Margin `lhs - rhs` of the Alexandrov inequality for one configuration.
pub fn alexandrov_margin(body: &ConvexBody, x: &Point, y: &Point, z: &Point, t: f64) -> Result<f64> {
    let region = Region::hilbert_ball(body.interior_point(), f64::INFINITY);
    let vars: Vec<f64> = x.iter().chain(y.iter()).chain(z.iter()).copied().chain([t]).collect();
    match Alexandrov(Triple { body, region: &region }).evaluate(&vars)? {
        Outcome::Evaluated(s) => Ok(s.margin()),
        _ => Err(GeometryError::OutOfRange { what: "alexandrov time", value: t }),
    }
}

/// Margin `lhs - rhs` of the Busemann inequality for one configuration.
pub fn busemann_margin(body: &ConvexBody, x: &Point, y: &Point, z: &Point) -> Result<f64> {
    let region = Region::hilbert_ball(body.interior_point(), f64::INFINITY);
    let vars: Vec<f64> = x.iter().chain(y.iter()).chain(z.iter()).copied().collect();
    match Busemann(Triple { body, region: &region }).evaluate(&vars)? {
        Outcome::Evaluated(s) => Ok(s.margin()),
        _ => Err(GeometryError::NotInDomain),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::npc::Verdict;
    use nalgebra::{dvector, DMatrix};

    fn disk() -> ConvexBody {
        ConvexBody::unit_ball(2).unwrap()
    }

    #[test]
    fn degenerate_triple_holds_with_equality() {
        let b = disk();
        let p = dvector![0.2, 0.1];
        assert_eq!(busemann_margin(&b, &p, &p, &p).unwrap(), 0.0);
        assert_eq!(alexandrov_margin(&b, &p, &p, &p, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn disk_passes_both() {
        let b = disk();
        let r = Region::default_for(&b);
        let p = CheckParams::new(2000, 42, 1e-9);
        let a = alexandrov_check(&b, &r, &p).unwrap();
        assert_eq!(a.verdict, Verdict::Pass, "{:?}", a.violations.first());
        let bu = busemann_check(&b, &r, &p).unwrap();
        assert_eq!(bu.verdict, Verdict::Pass, "{:?}", bu.violations.first());
        assert_eq!(bu.samples_tested, 2000);
    }

    #[test]
    fn ellipse_passes_busemann() {
        let b = ConvexBody::ellipsoid(dvector![0.0, 0.0], DMatrix::from_diagonal(&dvector![0.25, 1.0])).unwrap();
        let rep = busemann_check(&b, &Region::default_for(&b), &CheckParams::new(2000, 1, 1e-9)).unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn square_fails_busemann() {
        let b = ConvexBody::cube(dvector![0.0, 0.0], &[1.0, 1.0]).unwrap();
        let rep = busemann_check(&b, &Region::default_for(&b), &CheckParams::new(500, 42, 1e-9)).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        let w = &rep.violations[0];
        assert!(w.margin > 1e-4);
        assert_eq!(w.margin, w.lhs - w.rhs);
        assert!(w.configuration.points.contains_key("y"));
    }

    #[test]
    fn tolerance_is_monotone() {
        let b = ConvexBody::cube(dvector![0.0, 0.0], &[1.0, 1.0]).unwrap();
        let r = Region::default_for(&b);
        let loose = busemann_check(&b, &r, &CheckParams::new(300, 3, 1e-2).with_refine_rounds(0)).unwrap();
        let tight = busemann_check(&b, &r, &CheckParams::new(300, 3, 1e-6).with_refine_rounds(0)).unwrap();
        assert!(tight.violation_count >= loose.violation_count);
        for w in &loose.violations {
            assert!(tight.violations.iter().any(|t| t.sample == w.sample) || tight.violations.len() == 16);
        }
    }
}
