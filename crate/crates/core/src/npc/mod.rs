//! Sampling checkers for non-positive curvature conditions on chord geodesics.
//!
//! Each checker draws configurations from a [`Region`], evaluates one inequality
//! `lhs <= rhs`, and records a [`ViolationWitness`] whenever
//! `margin = lhs - rhs` exceeds the tolerance. Checkers only falsify: a passing
//! report is evidence, not proof.
//!
//! Samples are evaluated in parallel, each from its own seeded substream, and
//! aggregated in index order, so reports are identical for any thread count.

mod angle;
mod comparison;
mod peakless;

pub use angle::{adjacent_angle_sum_check, average_angle, comparison_angle, AngleParams, AverageAngle};
pub use comparison::{alexandrov_check, alexandrov_margin, busemann_check, busemann_margin};
pub use peakless::{capsule_check, pedersen_check, random_capsule_check, PedersenParams};

use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::body::Point;
use crate::error::Result;
use crate::sampling::{self, Region, SampleRng};

/// Default tolerance for bodies with closed-form boundary oracles.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default tolerance for smooth sublevel bodies.
pub const DEFAULT_SMOOTH_TOL: f64 = 1e-7;
/// Default tolerance of the angle-sum probe, limited by the halving scheme.
pub const DEFAULT_ANGLE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckerId {
    Alexandrov,
    Busemann,
    Pedersen,
    Capsule,
    AngleSum,
}

impl CheckerId {
    pub fn name(self) -> &'static str {
        match self {
            CheckerId::Alexandrov => "alexandrov",
            CheckerId::Busemann => "busemann",
            CheckerId::Pedersen => "pedersen",
            CheckerId::Capsule => "capsule",
            CheckerId::AngleSum => "angle-sum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Labeled points and scalar parameters of one configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Configuration {
    pub points: BTreeMap<String, Vec<f64>>,
    pub params: BTreeMap<String, f64>,
}

impl Configuration {
    pub(crate) fn point(mut self, name: &str, p: &[f64]) -> Self {
        self.points.insert(name.to_owned(), p.to_vec());
        self
    }

    pub(crate) fn param(mut self, name: &str, v: f64) -> Self {
        self.params.insert(name.to_owned(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationWitness {
    pub checker: CheckerId,
    /// Index of the originating sample; `None` for a refined witness.
    pub sample: Option<usize>,
    pub configuration: Configuration,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub checker: CheckerId,
    pub samples_tested: usize,
    pub violation_count: usize,
    /// Largest-margin violations, sorted by decreasing margin and capped.
    pub violations: Vec<ViolationWitness>,
    /// Largest margin seen over all evaluated configurations (negative when
    /// every configuration satisfies the inequality strictly).
    pub worst_margin: f64,
    pub verdict: Verdict,
    pub seed: u64,
    pub tolerance: f64,
    pub region: Region,
    pub parameters: BTreeMap<String, f64>,
    pub statistics: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Parameters shared by all checkers.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckParams {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Coordinate-descent rounds applied to the worst configuration (Alexandrov
    /// and Busemann only); 0 disables refinement.
    pub refine_rounds: usize,
    /// Maximum number of witnesses kept in the report.
    pub witness_cap: usize,
}

impl CheckParams {
    pub fn new(samples: usize, seed: u64, tol: f64) -> Self {
        Self { samples, seed, tol, refine_rounds: 10, witness_cap: 16 }
    }

    pub fn with_refine_rounds(mut self, rounds: usize) -> Self {
        self.refine_rounds = rounds;
        self
    }
}

/// The two sides of an evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }
}

pub(crate) enum Outcome {
    Evaluated(Sides),
    /// Configuration left the region (refinement only).
    Infeasible,
    /// Evaluated but excluded from the verdict (e.g. a non-converged angle).
    Excluded,
}

/// One inequality over a flat vector of configuration variables.
pub(crate) trait Inequality: Sync {
    fn id(&self) -> CheckerId;
    fn region(&self) -> &Region;
    fn sample(&self, rng: &mut SampleRng) -> Result<Vec<f64>>;
    fn evaluate(&self, vars: &[f64]) -> Result<Outcome>;
    fn describe(&self, vars: &[f64]) -> Configuration;
    /// Initial coordinate-descent step; `None` disables refinement.
    fn refine_step(&self) -> Option<f64> {
        None
    }
    fn parameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }
    fn statistics(&self, _evaluated: &[Sides], _excluded: usize) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }
}

pub(crate) fn point_at(vars: &[f64], index: usize, dim: usize) -> Point {
    DVector::from_column_slice(&vars[index * dim..(index + 1) * dim])
}

pub(crate) fn run_check(ineq: &impl Inequality, params: &CheckParams) -> Result<CheckReport> {
    let outcomes: Vec<(Vec<f64>, Outcome)> = (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sampling::substream(params.seed, i as u64);
            let vars = ineq.sample(&mut rng)?;
            let out = ineq.evaluate(&vars)?;
            Ok((vars, out))
        })
        .collect::<Result<_>>()?;

    let mut violations = Vec::new();
    let mut evaluated = Vec::with_capacity(outcomes.len());
    let mut excluded = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_index = None;
    for (i, (vars, out)) in outcomes.iter().enumerate() {
        match out {
            Outcome::Evaluated(sides) => {
                evaluated.push(*sides);
                let m = sides.margin();
                if m > worst {
                    worst = m;
                    worst_index = Some(i);
                }
                if m > params.tol {
                    violations.push(witness(ineq, Some(i), vars, *sides));
                }
            }
            Outcome::Excluded => excluded += 1,
            Outcome::Infeasible => {}
        }
    }

    let mut parameters = ineq.parameters();
    parameters.insert("samples".into(), params.samples as f64);
    if let (Some(step), Some(i)) = (ineq.refine_step(), worst_index) {
        if params.refine_rounds > 0 {
            parameters.insert("refine_rounds".into(), params.refine_rounds as f64);
            let Outcome::Evaluated(start) = outcomes[i].1 else { unreachable!() };
            let (vars, sides) = refine(ineq, &outcomes[i].0, start, step, params.refine_rounds);
            let m = sides.margin();
            worst = worst.max(m);
            if m > params.tol {
                violations.push(witness(ineq, None, &vars, sides));
            }
        }
    }

    let violation_count = violations.len();
    violations.sort_by(|a, b| b.margin.total_cmp(&a.margin).then(a.sample.cmp(&b.sample)));
    violations.truncate(params.witness_cap);
    Ok(CheckReport {
        checker: ineq.id(),
        samples_tested: params.samples,
        violation_count,
        verdict: if violation_count > 0 { Verdict::Fail } else { Verdict::Pass },
        violations,
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
        seed: params.seed,
        tolerance: params.tol,
        region: ineq.region().clone(),
        parameters,
        statistics: ineq.statistics(&evaluated, excluded),
    })
}

fn witness(ineq: &impl Inequality, sample: Option<usize>, vars: &[f64], sides: Sides) -> ViolationWitness {
    ViolationWitness {
        checker: ineq.id(),
        sample,
        configuration: ineq.describe(vars),
        lhs: sides.lhs,
        rhs: sides.rhs,
        margin: sides.margin(),
    }
}

/// Coordinate-descent maximization of the margin with shrinking steps.
pub(crate) fn refine(
    ineq: &impl Inequality,
    start: &[f64],
    start_sides: Sides,
    initial_step: f64,
    rounds: usize,
) -> (Vec<f64>, Sides) {
    // Trial points that leave the region or hit the boundary are skipped.
    let score = |v: &[f64]| match ineq.evaluate(v) {
        Ok(Outcome::Evaluated(s)) if s.margin().is_finite() => Some(s),
        _ => None,
    };
    let mut best = start.to_vec();
    let mut best_sides = start_sides;
    let mut step = initial_step;
    for _ in 0..rounds {
        for _sweep in 0..20 {
            let mut improved = false;
            for i in 0..best.len() {
                for sign in [1.0, -1.0] {
                    let mut trial = best.clone();
                    trial[i] += sign * step;
                    if let Some(s) = score(&trial) {
                        if s.margin() > best_sides.margin() {
                            best = trial;
                            best_sides = s;
                            improved = true;
                            break;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
        step *= 0.5;
    }
    (best, best_sides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checker_names_match_serialization() {
        for id in
            [CheckerId::Alexandrov, CheckerId::Busemann, CheckerId::Pedersen, CheckerId::Capsule, CheckerId::AngleSum]
        {
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.name()));
        }
    }
}
