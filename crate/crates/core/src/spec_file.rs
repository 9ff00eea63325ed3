//! TOML domain-spec files, one body per document.
//!
//! ```toml
//! kind = "ellipsoid"
//! center = [0.0, 0.0]
//! matrix = [[0.25, 0.0], [0.0, 1.0]]   # K = {(x-c)^T M (x-c) < 1}
//! ```
//!
//! Other kinds:
//!
//! ```toml
//! kind = "ball"
//! center = [0.0, 0.0]
//! radius = 1.0
//!
//! kind = "polytope"
//! halfspaces = [{ normal = [1.0, 0.0], offset = 1.0 }, ...]   # <n, x> < offset
//!
//! kind = "smooth"
//! center = [0.0, 0.0]          # a point with phi < 0
//! enclosing_radius = 1.5       # K is inside the ball of this radius about center
//! phi = { family = "superellipse", exponent = 4.0 }
//! # or phi = { family = "polynomial", terms = [{ coef = 1.0, powers = [2, 0] }, ...] }
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::body::{ConvexBody, DefiningFunction, HalfSpace, Monomial};
use crate::error::GeometryError;

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid domain spec: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid body: {0}")]
    Body(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid { center: Vec<f64>, matrix: Vec<Vec<f64>> },
    Polytope { halfspaces: Vec<HalfSpaceSpec> },
    Smooth { center: Vec<f64>, enclosing_radius: f64, phi: PhiSpec },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfSpaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum PhiSpec {
    Superellipse { exponent: f64 },
    Polynomial { terms: Vec<MonomialSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub coef: f64,
    pub powers: Vec<u32>,
}

impl BodySpec {
    pub fn from_toml(text: &str) -> Result<Self, SpecError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SpecError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn build(&self) -> Result<ConvexBody, GeometryError> {
        match self {
            BodySpec::Ball { center, radius } => ConvexBody::ball(DVector::from_vec(center.clone()), *radius),
            BodySpec::Ellipsoid { center, matrix } => {
                let n = center.len();
                if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
                    return Err(GeometryError::InvalidBody(format!("matrix must be {n}x{n}")));
                }
                let m = DMatrix::from_row_iterator(n, n, matrix.iter().flatten().copied());
                ConvexBody::ellipsoid(DVector::from_vec(center.clone()), m)
            }
            BodySpec::Polytope { halfspaces } => ConvexBody::polytope(
                halfspaces.iter().map(|h| HalfSpace::new(DVector::from_vec(h.normal.clone()), h.offset)).collect(),
            ),
            BodySpec::Smooth { center, enclosing_radius, phi } => {
                let phi = match phi {
                    PhiSpec::Superellipse { exponent } => DefiningFunction::Superellipse { exponent: *exponent },
                    PhiSpec::Polynomial { terms } => DefiningFunction::Polynomial {
                        terms: terms.iter().map(|t| Monomial { coef: t.coef, powers: t.powers.clone() }).collect(),
                    },
                };
                ConvexBody::smooth(phi, DVector::from_vec(center.clone()), *enclosing_radius)
            }
        }
    }
}
