//! Seeded random streams and sampling regions.
//!
//! Each sample index draws from its own ChaCha stream derived from the run seed,
//! so results do not depend on evaluation order or thread count.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::body::{ConvexBody, Point, Vector};
use crate::error::{GeometryError, Result};
use crate::metric::hilbert_distance;

pub type SampleRng = ChaCha8Rng;

/// Independent random stream for sample `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn uniform_in_box(rng: &mut SampleRng, lo: &Point, hi: &Point) -> Point {
    DVector::from_fn(lo.len(), |i, _| lo[i] + (hi[i] - lo[i]) * rng.random::<f64>())
}

pub fn unit_direction(rng: &mut SampleRng, dim: usize) -> Vector {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Maximum rejection-sampling attempts per point.
pub const MAX_ATTEMPTS: usize = 100_000;

/// Closed Hilbert ball `{p : d_K(center, p) <= radius}` used as the sampling region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Region {
    pub const DEFAULT_RADIUS: f64 = 2.0;

    pub fn hilbert_ball(center: &Point, radius: f64) -> Self {
        Self { center: center.as_slice().to_vec(), radius }
    }

    /// Hilbert ball of radius 2 about the body's interior point.
    pub fn default_for(body: &ConvexBody) -> Self {
        Self::hilbert_ball(body.interior_point(), Self::DEFAULT_RADIUS)
    }

    pub fn center_point(&self) -> Point {
        DVector::from_column_slice(&self.center)
    }

    pub fn contains(&self, body: &ConvexBody, p: &Point) -> bool {
        if !body.contains_unchecked(p) {
            return false;
        }
        matches!(hilbert_distance(body, &self.center_point(), p), Ok(d) if d <= self.radius)
    }

    /// Rejection sample from the body's bounding box.
    pub fn sample(&self, body: &ConvexBody, rng: &mut SampleRng) -> Result<Point> {
        let (lo, hi) = body.bounding_box();
        let c = self.center_point();
        for _ in 0..MAX_ATTEMPTS {
            let p = uniform_in_box(rng, lo, hi);
            if !body.contains_unchecked(&p) {
                continue;
            }
            match hilbert_distance(body, &c, &p) {
                Ok(d) if d <= self.radius => return Ok(p),
                Ok(_) | Err(GeometryError::TooCloseToBoundary { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(GeometryError::SamplingExhausted(MAX_ATTEMPTS))
    }
}
