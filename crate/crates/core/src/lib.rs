//! Numerical Hilbert geometry on bounded convex domains.
//!
//! - [`body`]: convex bodies with membership and ray–boundary oracles.
//! - [`catalog`]: the disk, ellipse, superellipse and square reference bodies.
//! - [`metric`]: cross-ratio, Hilbert distance, Funk and Hilbert norms, curve length.
//! - [`geodesic`]: straight-chord geodesics, midpoints, distance to a geodesic.
//! - [`npc`]: sampling checkers for Alexandrov, Busemann, Pedersen and capsule
//!   non-positive curvature, and average angles.
//! - [`finsler`]: fundamental tensor, spray, Berwald defect and flag curvature of
//!   the Hilbert–Finsler norm by finite differences.
//! - [`spec_file`]: the TOML domain-spec format.

pub mod body;
pub mod catalog;
pub mod error;
pub mod finsler;
pub mod geodesic;
pub mod metric;
pub mod npc;
pub mod sampling;
pub mod spec_file;

pub use body::{chord_through, validate, Chord, ConvexBody, Point, ValidationReport, Vector};
pub use error::{GeometryError, Result};

/// Library version, embedded in every report the front end writes.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
