//! Comparison angles, average angles and the adjacent angle-sum probe.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::body::{ConvexBody, Point};
use crate::error::{GeometryError, Result};
use crate::geodesic::GeodesicSegment;
use crate::metric::hilbert_distance;
use crate::npc::{point_at, run_check, CheckParams, CheckReport, CheckerId, Configuration, Inequality, Outcome, Sides};
use crate::sampling::{Region, SampleRng};
use rand::Rng;

const CLAMP_TOL: f64 = 1e-9;
const BASEPOINT_TOL: f64 = 1e-12;
/// Halving stops once the scaled arclength drops below this.
const MIN_SCALE: f64 = 1e-8;

/// Euclidean comparison angle opposite `d` in a triangle with sides `a, b, d`.
pub fn comparison_angle(a: f64, b: f64, d: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(GeometryError::OutOfRange { what: "comparison side a", value: a });
    }
    if !(b > 0.0) {
        return Err(GeometryError::OutOfRange { what: "comparison side b", value: b });
    }
    if !(d >= 0.0) {
        return Err(GeometryError::OutOfRange { what: "comparison side d", value: d });
    }
    let arg = (a * a + b * b - d * d) / (2.0 * a * b);
    if !arg.is_finite() || arg.abs() > 1.0 + CLAMP_TOL {
        return Err(GeometryError::AngleDomain(arg));
    }
    Ok(arg.clamp(-1.0, 1.0).acos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleParams {
    pub max_halvings: usize,
    pub conv_tol: f64,
}

impl Default for AngleParams {
    fn default() -> Self {
        Self { max_halvings: 30, conv_tol: 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageAngle {
    pub value: f64,
    pub converged: bool,
    /// Number of halvings performed before stopping.
    pub halvings: usize,
}

/// Limit of `A(a / 2ⁿ, b / 2ⁿ)` for two segments leaving a common point, with
/// `a, b` their Hilbert lengths and points taken by arclength.
pub fn average_angle(g1: &GeodesicSegment<'_>, g2: &GeodesicSegment<'_>, params: AngleParams) -> Result<AverageAngle> {
    let gap = (g1.start() - g2.start()).amax();
    if gap > BASEPOINT_TOL {
        return Err(GeometryError::NoSharedBasepoint { gap });
    }
    let (a, b) = (g1.length(), g2.length());
    if a == 0.0 || b == 0.0 {
        return Err(GeometryError::CoincidentPoints);
    }
    let body = g1.body();
    let mut prev: Option<f64> = None;
    let mut scale = 1.0;
    for n in 0..=params.max_halvings {
        let (sa, sb) = (a * scale, b * scale);
        if sa.min(sb) < MIN_SCALE {
            break;
        }
        let d = hilbert_distance(body, &g1.eval_arclength(sa)?, &g2.eval_arclength(sb)?)?;
        let value = comparison_angle(sa, sb, d)?;
        if let Some(p) = prev {
            if (value - p).abs() < params.conv_tol {
                return Ok(AverageAngle { value, converged: true, halvings: n });
            }
        }
        prev = Some(value);
        scale *= 0.5;
    }
    let halvings = params.max_halvings;
    Ok(AverageAngle { value: prev.unwrap_or(f64::NAN), converged: false, halvings })
}

/// Angle at `q` between the segments `q -> u` and `q -> v`.
fn angle_at(body: &ConvexBody, q: &Point, u: &Point, v: &Point, params: AngleParams) -> Result<AverageAngle> {
    average_angle(&GeodesicSegment::new(body, q, u)?, &GeodesicSegment::new(body, q, v)?, params)
}

/// `∠(p, q, s) + ∠(s, q, r) >= π` for `q` inside the chord `pr`. Variables:
/// `p, r, tq, s`, with `q = (1 - tq) p + tq r`.
struct AngleSum<'a> {
    body: &'a ConvexBody,
    region: &'a Region,
    angle: AngleParams,
}

/// Minimum `|sin|` between `s - q` and the chord direction.
const MIN_OFF_CHORD: f64 = 1e-3;

impl AngleSum<'_> {
    fn q(&self, vars: &[f64]) -> Point {
        let n = self.body.dim();
        let (p, r, t) = (point_at(vars, 0, n), point_at(vars, 1, n), vars[2 * n]);
        p * (1.0 - t) + r * t
    }

    fn sum(&self, vars: &[f64]) -> Result<Option<f64>> {
        let n = self.body.dim();
        let (p, r) = (point_at(vars, 0, n), point_at(vars, 1, n));
        let s = Point::from_column_slice(&vars[2 * n + 1..3 * n + 1]);
        let q = self.q(vars);
        let a1 = angle_at(self.body, &q, &p, &s, self.angle)?;
        let a2 = angle_at(self.body, &q, &s, &r, self.angle)?;
        Ok((a1.converged && a2.converged).then_some(a1.value + a2.value))
    }
}

impl Inequality for AngleSum<'_> {
    fn id(&self) -> CheckerId {
        CheckerId::AngleSum
    }

    fn region(&self) -> &Region {
        self.region
    }

    fn sample(&self, rng: &mut SampleRng) -> Result<Vec<f64>> {
        let p = self.region.sample(self.body, rng)?;
        let r = self.region.sample(self.body, rng)?;
        let t = rng.random_range(0.2..=0.8);
        let mut vars: Vec<f64> = p.iter().chain(r.iter()).copied().collect();
        vars.push(t);
        let q = self.q(&vars);
        let chord = &r - &p;
        for _ in 0..crate::sampling::MAX_ATTEMPTS {
            let s = self.region.sample(self.body, rng)?;
            let w = &s - &q;
            let cos = w.dot(&chord) / (w.norm() * chord.norm());
            if (1.0 - cos * cos).sqrt() > MIN_OFF_CHORD {
                vars.extend_from_slice(s.as_slice());
                return Ok(vars);
            }
        }
        Err(GeometryError::SamplingExhausted(crate::sampling::MAX_ATTEMPTS))
    }

    fn evaluate(&self, vars: &[f64]) -> Result<Outcome> {
        Ok(match self.sum(vars)? {
            Some(sum) => Outcome::Evaluated(Sides { lhs: PI, rhs: sum }),
            None => Outcome::Excluded,
        })
    }

    fn describe(&self, vars: &[f64]) -> Configuration {
        let n = self.body.dim();
        Configuration::default()
            .point("p", &vars[0..n])
            .point("r", &vars[n..2 * n])
            .point("q", self.q(vars).as_slice())
            .point("s", &vars[2 * n + 1..3 * n + 1])
            .param("tq", vars[2 * n])
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("max_halvings".to_owned(), self.angle.max_halvings as f64),
            ("conv_tol".to_owned(), self.angle.conv_tol),
        ])
    }

    fn statistics(&self, evaluated: &[Sides], excluded: usize) -> BTreeMap<String, f64> {
        let sums = evaluated.iter().map(|s| s.rhs);
        let mut out = BTreeMap::from([("non_converged".to_owned(), excluded as f64)]);
        if !evaluated.is_empty() {
            out.insert("min_angle_sum".into(), sums.clone().fold(f64::INFINITY, f64::min));
            out.insert("max_angle_sum".into(), sums.fold(f64::NEG_INFINITY, f64::max));
        }
        out
    }
}

/// Adjacent average angles at an interior chord point against a random
/// off-chord point, flagged when their sum falls below `π - tol`.
pub fn adjacent_angle_sum_check(
    body: &ConvexBody,
    region: &Region,
    params: &CheckParams,
    angle: AngleParams,
) -> Result<CheckReport> {
    run_check(&AngleSum { body, region, angle }, params)
}
