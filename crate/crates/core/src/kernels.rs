//! Free-space Laplace kernel `Γ⁰(x, y) = (1/2π) log|x − y|` and its normal
//! derivative.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{curvature, Curve, Vec2};

const INV_TWO_PI: f64 = 0.5 / PI;

/// A kernel argument, optionally carrying a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub position: Vec2,
    pub normal: Option<Vec2>,
}

impl KernelPoint {
    pub fn interior(position: Vec2) -> Self {
        Self {
            position,
            normal: None,
        }
    }

    pub fn on_boundary(position: Vec2, normal: Vec2) -> Result<Self> {
        if (normal.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "normal {normal:?} is not a unit vector"
            )));
        }
        Ok(Self {
            position,
            normal: Some(normal),
        })
    }
}

fn separation(x: Vec2, y: Vec2) -> Result<Vec2> {
    let d = x - y;
    if d.norm_squared() == 0.0 {
        return Err(Error::Singularity(format!("coincident points {x:?}")));
    }
    Ok(d)
}

pub fn gamma0(x: Vec2, y: Vec2) -> Result<f64> {
    let d = separation(x, y)?;
    Ok(gamma0_from_r2(d.norm_squared()))
}

/// `Γ⁰` from the squared distance; no singularity check.
#[inline]
pub(crate) fn gamma0_from_r2(r2: f64) -> f64 {
    0.25 / PI * r2.ln()
}

/// `∂_{ν_x} Γ⁰(x, y) = (x − y)·ν_x / (2π|x − y|²)`.
pub fn gamma0_dnu(x: Vec2, nu_x: Vec2, y: Vec2) -> Result<f64> {
    let d = separation(x, y)?;
    Ok(d.dot(nu_x) * INV_TWO_PI / d.norm_squared())
}

#[inline]
pub(crate) fn gamma0_dnu_unchecked(x: Vec2, nu_x: Vec2, y: Vec2) -> f64 {
    let d = x - y;
    d.dot(nu_x) * INV_TWO_PI / d.norm_squared()
}

/// Limit of `gamma0_dnu(x(t), ν(t), x(s))` as `s → t`: `κ(t)/(4π)`.
pub fn gamma0_dnu_diagonal_limit<C: Curve + ?Sized>(curve: &C, t: f64) -> Result<f64> {
    Ok(curvature(curve, t)? * 0.25 / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point_normal_speed, BoundaryCurve, TWO_PI};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_values() {
        let o = Vec2::new(0.3, -0.2);
        assert_eq!(gamma0(o, o + Vec2::new(0.6, 0.8)).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((gamma0(o, o + Vec2::new(0.0, e)).unwrap() - INV_TWO_PI).abs() < 1e-15);
        assert!(matches!(gamma0(o, o), Err(Error::Singularity(_))));
        assert!(gamma0_dnu(o, Vec2::new(1.0, 0.0), o).is_err());
    }

    #[test]
    fn symmetric_in_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let y = Vec2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            assert_eq!(gamma0(x, y).unwrap(), gamma0(y, x).unwrap());
        }
    }

    #[test]
    fn unit_circle_normal_derivative_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = rng.gen_range(0.0..TWO_PI);
            let b = rng.gen_range(0.0..TWO_PI);
            let x = Vec2::new(a.cos(), a.sin());
            let y = Vec2::new(b.cos(), b.sin());
            let v = gamma0_dnu(x, x, y).unwrap();
            assert!((v - 0.25 / PI).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn orthogonal_normal_gives_zero() {
        let x = Vec2::new(1.0, 2.0);
        let y = Vec2::new(3.0, 2.0);
        assert_eq!(gamma0_dnu(x, Vec2::new(0.0, 1.0), y).unwrap(), 0.0);
    }

    #[test]
    fn homogeneous_of_degree_minus_one() {
        let x = Vec2::new(0.4, 0.1);
        let y = Vec2::new(-0.7, 0.9);
        let nu = Vec2::new(0.6, 0.8);
        let base = gamma0_dnu(x, nu, y).unwrap();
        for s in [0.1, 2.0, 17.0] {
            let scaled = gamma0_dnu(x * s, nu, y * s).unwrap();
            assert!((scaled - base / s).abs() < 1e-14 * base.abs().max(1.0) / s.min(1.0));
        }
    }

    #[test]
    fn diagonal_limits() {
        let c = BoundaryCurve::unit_circle();
        for t in [0.0, 1.0, 4.0] {
            assert!((gamma0_dnu_diagonal_limit(&c, t).unwrap() - 0.25 / PI).abs() < 1e-15);
        }
        let r = 2.5;
        let c = BoundaryCurve::circle(r).unwrap();
        assert!((gamma0_dnu_diagonal_limit(&c, 0.3).unwrap() - 0.25 / (PI * r)).abs() < 1e-15);

        struct Line;
        impl Curve for Line {
            fn point(&self, t: f64) -> Vec2 {
                Vec2::new(t, 0.0)
            }
            fn derivative(&self, _t: f64) -> Vec2 {
                Vec2::new(1.0, 0.0)
            }
            fn second_derivative(&self, _t: f64) -> Vec2 {
                Vec2::default()
            }
        }
        assert_eq!(gamma0_dnu_diagonal_limit(&Line, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn off_diagonal_converges_to_limit_at_first_order() {
        let c = BoundaryCurve::ellipse(2.0, 0.7).unwrap();
        let t = 0.9;
        let bp = point_normal_speed(&c, t).unwrap();
        let limit = gamma0_dnu_diagonal_limit(&c, t).unwrap();
        let err = |h: f64| (gamma0_dnu(bp.point, bp.normal, c.point(t + h)).unwrap() - limit).abs();
        let (e1, e2, e3) = (err(1e-2), err(5e-3), err(2.5e-3));
        assert!(e1 < 1e-1 && e3 < e2 && e2 < e1);
        let order = (e1 / e3).log2() / 2.0;
        assert!(order > 0.9, "order {order}");
    }

    /// Gauss identity by the periodic trapezoidal rule.
    #[test]
    fn gauss_identity() {
        let c = BoundaryCurve::Kite;
        let m = 800;
        let flux = |x: Vec2| {
            (0..m)
                .map(|j| {
                    let t = j as f64 * TWO_PI / m as f64;
                    let bp = point_normal_speed(&c, t).unwrap();
                    gamma0_dnu(bp.point, bp.normal, x).unwrap() * bp.speed
                })
                .sum::<f64>()
                * TWO_PI
                / m as f64
        };
        assert!((flux(Vec2::new(0.0, 0.0)) - 1.0).abs() < 1e-10);
        assert!((flux(Vec2::new(-0.3, 0.8)) - 1.0).abs() < 1e-10);
        assert!(flux(Vec2::new(3.0, 0.0)).abs() < 1e-10);
    }
}
