use super::{Curve, TWO_PI};
use crate::error::{Error, Result};

/// Cumulative arclength `s(t) = ∫₀ᵗ |x'(τ)| dτ` and its inverse.
///
/// The speed of a smooth periodic curve is itself smooth and periodic, so it
/// is stored as a truncated Fourier series that is integrated term by term.
/// `s` is then available in closed form for any real `t`, and the inverse is
/// a safeguarded Newton iteration using `s' = |x'|`.
#[derive(Debug, Clone)]
pub struct ArcLengthMap {
    mean_speed: f64,
    cos_coeffs: Vec<f64>,
    sin_coeffs: Vec<f64>,
    perimeter: f64,
}

const MAX_SAMPLES: usize = 1 << 14;
const INVERSE_TOL: f64 = 1e-13;

impl ArcLengthMap {
    pub fn new<C: Curve + ?Sized>(curve: &C) -> Result<Self> {
        let mut m = 64;
        loop {
            let speeds: Vec<f64> = (0..m)
                .map(|j| curve.derivative(j as f64 * TWO_PI / m as f64).norm())
                .collect();
            if let Some(bad) = speeds.iter().find(|s| !(**s > super::MIN_SPEED)) {
                return Err(Error::Geometry(format!("degenerate speed {bad:e}")));
            }
            let (mean, a, b) = real_fourier(&speeds);
            let top = a.len();
            let tail = a[3 * top / 4..]
                .iter()
                .chain(&b[3 * top / 4..])
                .fold(0.0_f64, |acc, v| acc.max(v.abs()));
            if tail <= 1e-15 * mean || m >= MAX_SAMPLES {
                return Ok(Self {
                    mean_speed: mean,
                    perimeter: TWO_PI * mean,
                    cos_coeffs: a,
                    sin_coeffs: b,
                });
            }
            m *= 2;
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Arclength from parameter 0 to `t`; `t` may lie outside `[0, 2π)`.
    pub fn arclength_at(&self, t: f64) -> f64 {
        let mut s = self.mean_speed * t;
        for (k, (a, b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let kf = (k + 1) as f64;
            let (sk, ck) = (kf * t).sin_cos();
            s += (a * sk - b * (ck - 1.0)) / kf;
        }
        s
    }

    pub fn speed_at(&self, t: f64) -> f64 {
        let mut v = self.mean_speed;
        for (k, (a, b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            let (sk, ck) = (((k + 1) as f64) * t).sin_cos();
            v += a * ck + b * sk;
        }
        v
    }

    /// Arclength of the parameter interval from `ta` to `tb`, travelling
    /// counterclockwise (so `tb < ta` wraps through `2π`).
    pub fn arclength_between(&self, ta: f64, tb: f64) -> f64 {
        let mut span = tb - ta;
        if span < 0.0 {
            span = span.rem_euclid(TWO_PI);
        }
        if span >= TWO_PI {
            return self.perimeter * (span / TWO_PI).floor()
                + self.arclength_between(ta, ta + span.rem_euclid(TWO_PI));
        }
        self.arclength_at(ta + span) - self.arclength_at(ta)
    }

    /// Parameter `t` with `arclength_at(t) = s`, for any real `s`.
    pub fn parameter_at(&self, s: f64) -> f64 {
        let periods = (s / self.perimeter).floor();
        let target = s - periods * self.perimeter;
        let offset = periods * TWO_PI;
        let (mut lo, mut hi) = (0.0, TWO_PI);
        let mut t = target / self.mean_speed;
        for _ in 0..100 {
            let f = self.arclength_at(t) - target;
            if f.abs() <= INVERSE_TOL * self.perimeter.max(1.0) {
                return offset + t;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let next = t - f / self.speed_at(t);
            t = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
        }
        offset + t
    }
}

/// Real Fourier coefficients of equispaced samples:
/// `v(t) ≈ mean + Σ_k a_k cos(kt) + b_k sin(kt)`, k = 1..m/2−1.
fn real_fourier(samples: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let m = samples.len();
    let mean = samples.iter().sum::<f64>() / m as f64;
    let kmax = m / 2 - 1;
    let mut a = vec![0.0; kmax];
    let mut b = vec![0.0; kmax];
    for k in 1..=kmax {
        let (mut sa, mut sb) = (0.0, 0.0);
        for (j, v) in samples.iter().enumerate() {
            let phase = TWO_PI * ((k * j) % m) as f64 / m as f64;
            let (s, c) = phase.sin_cos();
            sa += v * c;
            sb += v * s;
        }
        a[k - 1] = 2.0 * sa / m as f64;
        b[k - 1] = 2.0 * sb / m as f64;
    }
    (mean, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryCurve;
    use std::f64::consts::PI;

    /// Composite Gauss–Legendre quadrature of the speed, independent of the
    /// Fourier route.
    fn gauss_arclength(curve: &BoundaryCurve, ta: f64, tb: f64, panels: usize) -> f64 {
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683,
            0.538_469_310_105_683,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
            0.236_926_885_056_189,
        ];
        let h = (tb - ta) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = ta + (p as f64 + 0.5) * h;
            for (x, w) in X.iter().zip(W) {
                total += w * 0.5 * h * curve.derivative(mid + 0.5 * h * x).norm();
            }
        }
        total
    }

    #[test]
    fn unit_circle_lengths() {
        let map = ArcLengthMap::new(&BoundaryCurve::unit_circle()).unwrap();
        assert!((map.arclength_between(0.0, PI) - PI).abs() < 1e-14);
        assert!((map.perimeter() - TWO_PI).abs() < 1e-14);
    }

    #[test]
    fn kite_perimeter_matches_gauss_oracle() {
        let kite = BoundaryCurve::Kite;
        let map = ArcLengthMap::new(&kite).unwrap();
        let oracle = gauss_arclength(&kite, 0.0, TWO_PI, 2000);
        assert!((map.perimeter() - oracle).abs() < 1e-11 * oracle);
        let partial = gauss_arclength(&kite, 0.3, 2.9, 2000);
        assert!((map.arclength_between(0.3, 2.9) - partial).abs() < 1e-11);
    }

    #[test]
    fn wrapping_interval_is_complement() {
        let map = ArcLengthMap::new(&BoundaryCurve::Kite).unwrap();
        let inner = map.arclength_between(1.0, 5.0);
        let outer = map.arclength_between(5.0, 1.0);
        assert!((inner + outer - map.perimeter()).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trips() {
        for curve in [
            BoundaryCurve::Kite,
            BoundaryCurve::ellipse(3.0, 0.4).unwrap(),
            BoundaryCurve::flower(0.15, 6).unwrap(),
        ] {
            let map = ArcLengthMap::new(&curve).unwrap();
            for j in -20..60 {
                let t = 0.21 * j as f64;
                let back = map.parameter_at(map.arclength_at(t));
                assert!((back - t).abs() < 1e-10, "{curve:?} t={t} back={back}");
            }
        }
    }
}
