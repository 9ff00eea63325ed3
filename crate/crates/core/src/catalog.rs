//! Reference bodies used throughout the tests and experiments.

use nalgebra::{dvector, DMatrix};

use crate::body::ConvexBody;

/// Unit disk in the plane.
pub fn disk() -> ConvexBody {
    ConvexBody::unit_ball(2).expect("valid body")
}

/// Ellipse `x²/4 + y² < 1`.
pub fn ellipse() -> ConvexBody {
    ConvexBody::ellipsoid(dvector![0.0, 0.0], DMatrix::from_diagonal(&dvector![0.25, 1.0])).expect("valid body")
}

/// Superellipse `x⁴ + y⁴ < 1`.
pub fn superellipse() -> ConvexBody {
    ConvexBody::superellipse(2, 4.0).expect("valid body")
}

/// Square `|x| < 1, |y| < 1`.
pub fn square() -> ConvexBody {
    ConvexBody::cube(dvector![0.0, 0.0], &[1.0, 1.0]).expect("valid body")
}
