use serde::{Deserialize, Serialize};

use super::{Vec2, TWO_PI};
use crate::error::{Error, Result};

/// Tangent magnitudes below this are treated as degenerate.
pub const MIN_SPEED: f64 = 1e-12;

/// A 2π-periodic, counterclockwise parametrization `t ↦ x(t)`.
pub trait Curve {
    fn point(&self, t: f64) -> Vec2;
    fn derivative(&self, t: f64) -> Vec2;
    fn second_derivative(&self, t: f64) -> Vec2;
}

impl<C: Curve + ?Sized> Curve for &C {
    fn point(&self, t: f64) -> Vec2 {
        (**self).point(t)
    }
    fn derivative(&self, t: f64) -> Vec2 {
        (**self).derivative(t)
    }
    fn second_derivative(&self, t: f64) -> Vec2 {
        (**self).second_derivative(t)
    }
}

/// Built-in curve catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryCurve {
    /// Circle of the given radius centred at the origin.
    Circle { radius: f64 },
    /// Axis-aligned ellipse `(a cos t, b sin t)`.
    Ellipse { semi_x: f64, semi_y: f64 },
    /// `(cos t + 0.65 cos 2t - 0.65, 1.5 sin t)`.
    Kite,
    /// Polar curve `r(θ) = 1 + ε cos(kθ)`.
    Flower { epsilon: f64, k: u32 },
}

impl BoundaryCurve {
    pub fn unit_circle() -> Self {
        BoundaryCurve::Circle { radius: 1.0 }
    }

    pub fn circle(radius: f64) -> Result<Self> {
        BoundaryCurve::Circle { radius }.validated()
    }

    pub fn ellipse(semi_x: f64, semi_y: f64) -> Result<Self> {
        BoundaryCurve::Ellipse { semi_x, semi_y }.validated()
    }

    pub fn flower(epsilon: f64, k: u32) -> Result<Self> {
        BoundaryCurve::Flower { epsilon, k }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BoundaryCurve::Circle { radius } => radius.is_finite() && radius > 0.0,
            BoundaryCurve::Ellipse { semi_x, semi_y } => {
                semi_x.is_finite() && semi_y.is_finite() && semi_x > 0.0 && semi_y > 0.0
            }
            BoundaryCurve::Kite => true,
            BoundaryCurve::Flower { epsilon, .. } => epsilon.is_finite() && epsilon.abs() < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry(format!("invalid curve parameters: {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryCurve::Circle { .. } => "circle",
            BoundaryCurve::Ellipse { .. } => "ellipse",
            BoundaryCurve::Kite => "kite",
            BoundaryCurve::Flower { .. } => "flower",
        }
    }

    /// Polar radius and its first two derivatives for the flower curve.
    fn flower_radius(epsilon: f64, k: u32, t: f64) -> (f64, f64, f64) {
        let k = f64::from(k);
        let (s, c) = (k * t).sin_cos();
        (1.0 + epsilon * c, -epsilon * k * s, -epsilon * k * k * c)
    }
}

impl Curve for BoundaryCurve {
    fn point(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        match *self {
            BoundaryCurve::Circle { radius } => Vec2::new(radius * c, radius * s),
            BoundaryCurve::Ellipse { semi_x, semi_y } => Vec2::new(semi_x * c, semi_y * s),
            BoundaryCurve::Kite => Vec2::new(c + 0.65 * (2.0 * t).cos() - 0.65, 1.5 * s),
            BoundaryCurve::Flower { epsilon, k } => {
                let (r, _, _) = Self::flower_radius(epsilon, k, t);
                Vec2::new(r * c, r * s)
            }
        }
    }

    fn derivative(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        match *self {
            BoundaryCurve::Circle { radius } => Vec2::new(-radius * s, radius * c),
            BoundaryCurve::Ellipse { semi_x, semi_y } => Vec2::new(-semi_x * s, semi_y * c),
            BoundaryCurve::Kite => Vec2::new(-s - 1.3 * (2.0 * t).sin(), 1.5 * c),
            BoundaryCurve::Flower { epsilon, k } => {
                let (r, dr, _) = Self::flower_radius(epsilon, k, t);
                Vec2::new(dr * c - r * s, dr * s + r * c)
            }
        }
    }

    fn second_derivative(&self, t: f64) -> Vec2 {
        let (s, c) = t.sin_cos();
        match *self {
            BoundaryCurve::Circle { radius } => Vec2::new(-radius * c, -radius * s),
            BoundaryCurve::Ellipse { semi_x, semi_y } => Vec2::new(-semi_x * c, -semi_y * s),
            BoundaryCurve::Kite => Vec2::new(-c - 2.6 * (2.0 * t).cos(), -1.5 * s),
            BoundaryCurve::Flower { epsilon, k } => {
                let (r, dr, ddr) = Self::flower_radius(epsilon, k, t);
                Vec2::new(
                    ddr * c - 2.0 * dr * s - r * c,
                    ddr * s + 2.0 * dr * c - r * s,
                )
            }
        }
    }
}

/// Point, outward unit normal and speed `|x'(t)|` at a parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: Vec2,
    pub normal: Vec2,
    pub speed: f64,
}

pub fn point_normal_speed<C: Curve + ?Sized>(curve: &C, t: f64) -> Result<BoundaryPoint> {
    let tangent = curve.derivative(t);
    let speed = tangent.norm();
    if !(speed > MIN_SPEED) {
        return Err(Error::Geometry(format!(
            "degenerate tangent |x'({t})| = {speed:e}"
        )));
    }
    Ok(BoundaryPoint {
        point: curve.point(t),
        normal: tangent.rotate_cw() * (1.0 / speed),
        speed,
    })
}

/// Signed curvature, positive where a counterclockwise curve is convex.
pub fn curvature<C: Curve + ?Sized>(curve: &C, t: f64) -> Result<f64> {
    let d1 = curve.derivative(t);
    let speed = d1.norm();
    if !(speed > MIN_SPEED) {
        return Err(Error::Geometry(format!(
            "degenerate tangent |x'({t})| = {speed:e}"
        )));
    }
    Ok(d1.cross(curve.second_derivative(t)) / speed.powi(3))
}

/// Enclosed signed area `½∮(x dy − y dx)` by the periodic trapezoidal rule.
pub fn signed_area<C: Curve + ?Sized>(curve: &C, samples: usize) -> f64 {
    let h = TWO_PI / samples as f64;
    (0..samples)
        .map(|j| {
            let t = j as f64 * h;
            0.5 * curve.point(t).cross(curve.derivative(t))
        })
        .sum::<f64>()
        * h
}
