//! Smooth closed boundary curves, their differential data, and Steklov/Neumann
//! partitions of the parameter interval `[0, 2π)`.

mod arclength;
mod curve;
mod partition;

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use arclength::ArcLengthMap;
pub use curve::{
    curvature, point_normal_speed, signed_area, BoundaryCurve, BoundaryPoint, Curve,
    MIN_SPEED,
};
pub use partition::{ArcSpec, ArcView, BoundaryPartition, Label};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Rotation by -π/2; for a counterclockwise tangent this is the outward direction.
    pub fn rotate_cw(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(p: [f64; 2]) -> Self {
        Vec2::new(p[0], p[1])
    }
}

/// Reduces a parameter to `[0, 2π)`.
pub fn wrap_parameter(t: f64) -> f64 {
    let r = t.rem_euclid(TWO_PI);
    // rem_euclid can return exactly 2π for tiny negative inputs
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}
