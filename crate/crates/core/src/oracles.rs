//! Closed-form Steklov spectra and related reference values.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::kernels::gamma0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Disk,
    Square,
    Annulus,
    Flower,
    Bound,
}

/// Ascending eigenvalues, repeated according to multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSpectrum {
    pub values: Vec<f64>,
    /// Multiplicity of the eigenvalue each entry belongs to.
    pub multiplicities: Vec<usize>,
    pub provenance: Provenance,
}

impl OracleSpectrum {
    fn from_groups(mut groups: Vec<(f64, usize)>, count: usize, provenance: Provenance) -> Self {
        groups.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values = Vec::with_capacity(count);
        let mut multiplicities = Vec::with_capacity(count);
        'outer: for (v, m) in groups {
            for _ in 0..m {
                if values.len() == count {
                    break 'outer;
                }
                values.push(v);
                multiplicities.push(m);
            }
        }
        Self {
            values,
            multiplicities,
            provenance,
        }
    }

    pub fn multiplicity_of(&self, value: f64, tol: f64) -> Option<usize> {
        self.values
            .iter()
            .position(|v| (v - value).abs() <= tol)
            .map(|i| self.multiplicities[i])
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    Ok(())
}

/// Unit disk: `{0, 1, 1, 2, 2, …}`.
pub fn disk_spectrum(count: usize) -> Result<OracleSpectrum> {
    check_count(count)?;
    let groups = (0..=count / 2 + 1)
        .map(|k| (k as f64, if k == 0 { 1 } else { 2 }))
        .collect();
    Ok(OracleSpectrum::from_groups(groups, count, Provenance::Disk))
}

/// Radius-`(1+ε)` disk, i.e. the `k = 0` flower.
pub fn flower_scaled_spectrum(epsilon: f64, count: usize) -> Result<OracleSpectrum> {
    if !(epsilon.abs() < 1.0) {
        return Err(Error::InvalidInput(format!("|epsilon| must be below 1, got {epsilon}")));
    }
    let mut s = disk_spectrum(count)?;
    s.values.iter_mut().for_each(|v| *v /= 1.0 + epsilon);
    s.provenance = Provenance::Flower;
    Ok(s)
}

/// Separable eigenfunction families of the square `(−1, 1)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SquareFamily {
    /// `cos(αx) cosh(αy)`: `tan α = −tanh α`, `λ = α tanh α`.
    CosCosh,
    /// `sin(αx) cosh(αy)`: `tan α = coth α`, `λ = α tanh α`.
    SinCosh,
    /// `cos(αx) sinh(αy)`: `tan α = −coth α`, `λ = α coth α`.
    CosSinh,
    /// `sin(αx) sinh(αy)`: `tan α = tanh α`, `λ = α coth α`.
    SinSinh,
}

impl SquareFamily {
    pub const ALL: [SquareFamily; 4] = [
        SquareFamily::CosCosh,
        SquareFamily::SinCosh,
        SquareFamily::CosSinh,
        SquareFamily::SinSinh,
    ];

    /// Bounded form of the condition (multiplied through by `cos α`).
    fn condition(self, a: f64) -> f64 {
        let (s, c) = a.sin_cos();
        let th = a.tanh();
        match self {
            SquareFamily::CosCosh => s + c * th,
            SquareFamily::SinCosh => s * th - c,
            SquareFamily::CosSinh => s * th + c,
            SquareFamily::SinSinh => s - c * th,
        }
    }

    /// `tan α − rhs(α)`.
    pub fn residual(self, a: f64) -> f64 {
        let rhs = match self {
            SquareFamily::CosCosh => -a.tanh(),
            SquareFamily::SinCosh => 1.0 / a.tanh(),
            SquareFamily::CosSinh => -1.0 / a.tanh(),
            SquareFamily::SinSinh => a.tanh(),
        };
        a.tan() - rhs
    }

    pub fn eigenvalue(self, a: f64) -> f64 {
        match self {
            SquareFamily::CosCosh | SquareFamily::SinCosh => a * a.tanh(),
            SquareFamily::CosSinh | SquareFamily::SinSinh => a / a.tanh(),
        }
    }

    /// Bracket containing the `k`-th positive root (`k = 0, 1, …`).
    fn bracket(self, k: usize) -> (f64, f64) {
        let kf = k as f64;
        match self {
            SquareFamily::CosCosh | SquareFamily::CosSinh => ((kf + 0.5) * PI, (kf + 1.0) * PI),
            SquareFamily::SinCosh => (kf * PI, (kf + 0.5) * PI),
            SquareFamily::SinSinh => ((kf + 1.0) * PI, (kf + 1.5) * PI),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareRoot {
    pub family: SquareFamily,
    pub alpha: f64,
    pub eigenvalue: f64,
    /// `|tan α − rhs(α)|` relative to `1 + |tan α|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareSpectrum {
    pub spectrum: OracleSpectrum,
    pub roots: Vec<SquareRoot>,
}

impl SquareSpectrum {
    /// The roots `α`, each listed twice, ascending.
    pub fn sorted_roots(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self.roots.iter().flat_map(|r| [r.alpha, r.alpha]).collect();
        r.sort_by(f64::total_cmp);
        r
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootBracket(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Square `(−1, 1)²`: every family root below `count·π`, doubly degenerate,
/// merged with the simple eigenvalues 0 and 1.
pub fn square_spectrum(count: usize) -> Result<SquareSpectrum> {
    check_count(count)?;
    let limit = count as f64 * PI;
    let mut roots = Vec::new();
    for family in SquareFamily::ALL {
        for k in 0.. {
            let (lo, hi) = family.bracket(k);
            if hi > limit {
                break;
            }
            let alpha = bisect(|a| family.condition(a), lo, hi)?;
            let tan = alpha.tan();
            roots.push(SquareRoot {
                family,
                alpha,
                eigenvalue: family.eigenvalue(alpha),
                residual: family.residual(alpha).abs() / (1.0 + tan.abs()),
            });
        }
    }
    let mut groups: Vec<(f64, usize)> = roots.iter().map(|r| (r.eigenvalue, 2)).collect();
    groups.push((0.0, 1));
    groups.push((1.0, 1));
    roots.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    Ok(SquareSpectrum {
        spectrum: OracleSpectrum::from_groups(groups, count, Provenance::Square),
        roots,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaMatch {
    Printed,
    EigenfunctionImplied,
    Both,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusEigenvalue {
    pub epsilon: f64,
    pub lambda: f64,
    /// `−((1+ε)/ε) log ε`.
    pub printed_formula: f64,
    /// `−(1+ε)/(ε log ε)`, the slope of the stated eigenfunction.
    pub eigenfunction_formula: f64,
    pub matches: FormulaMatch,
}

/// Radial eigenvalue of the annulus `ε < |x| < 1`.
///
/// With `f = A log r + B`, the conditions `f'(1) = λ f(1)` and
/// `−f'(ε) = λ f(ε)` give the homogeneous system
/// `[1, −λ; 1/ε + λ log ε, λ] (A, B)ᵀ = 0`, whose determinant
/// `λ (1 + 1/ε + λ log ε)` has exactly one nonzero root.
pub fn annulus_radial_eigenvalue(epsilon: f64) -> Result<AnnulusEigenvalue> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("inner radius must lie in (0, 1), got {epsilon}")));
    }
    let l = epsilon.ln();
    let det_slope = |lambda: f64| 1.0 + 1.0 / epsilon + lambda * l;
    // the reduced determinant is affine in λ; solve it by one secant step
    let (d0, d1) = (det_slope(0.0), det_slope(1.0));
    let lambda = -d0 / (d1 - d0);
    let printed = -((1.0 + epsilon) / epsilon) * l;
    let implied = -(1.0 + epsilon) / (epsilon * l);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
    let matches = match (close(lambda, printed), close(lambda, implied)) {
        (true, true) => FormulaMatch::Both,
        (true, false) => FormulaMatch::Printed,
        (false, true) => FormulaMatch::EigenfunctionImplied,
        (false, false) => FormulaMatch::Neither,
    };
    Ok(AnnulusEigenvalue {
        epsilon,
        lambda,
        printed_formula: printed,
        eigenfunction_formula: implied,
        matches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperBound {
    pub bound: f64,
    /// `4π/|Γ_S|`, which `λ₃` stays strictly below.
    pub strict_third: Option<f64>,
}

/// `λ_j ≤ 2π(j−1)/|Γ_S|` for the 1-based index `j`.
pub fn steklov_neumann_upper_bound(j: usize, gamma_s_length: f64) -> Result<UpperBound> {
    if j == 0 || !(gamma_s_length > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need j ≥ 1 and positive length, got j={j}, length={gamma_s_length}"
        )));
    }
    Ok(UpperBound {
        bound: 2.0 * PI * (j - 1) as f64 / gamma_s_length,
        strict_third: (j == 3).then(|| 4.0 * PI / gamma_s_length),
    })
}

/// Pure-Steklov Green's function of the unit disk, summed from its Fourier
/// series: `Γ⁰ + 1/(2πλ) + Σ a_m r^m cos(m(θ − θ_S))`.
pub fn disk_greens(source: Vec2, y: Vec2, lambda: f64) -> Result<f64> {
    let rho = source.norm();
    let r = y.norm();
    if !(rho < 1.0 && r <= 1.0 + 1e-12) {
        return Err(Error::InvalidInput("points must lie in the closed unit disk".into()));
    }
    if !(lambda > 0.0) || (lambda - lambda.round()).abs() < 1e-12 {
        return Err(Error::InvalidInput(format!("lambda {lambda} is an eigenvalue or nonpositive")));
    }
    let dtheta = y.angle() - source.angle();
    let mut sum = gamma0(source, y)? + 1.0 / (2.0 * PI * lambda);
    let q = rho * r;
    let mut power = 1.0;
    for m in 1..100_000 {
        power *= q;
        let mf = m as f64;
        let term = -power * (lambda / mf + 1.0) / (2.0 * PI * (mf - lambda)) * (mf * dtheta).cos();
        sum += term;
        if power < 1e-18 {
            break;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_values() {
        let s = disk_spectrum(9).unwrap();
        assert_eq!(s.values, vec![0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0]);
        assert_eq!(disk_spectrum(1).unwrap().values, vec![0.0]);
        assert_eq!(s.multiplicity_of(3.0, 0.0), Some(2));
        assert_eq!(s.multiplicity_of(0.0, 0.0), Some(1));
        assert!(disk_spectrum(0).is_err());
    }

    #[test]
    fn flower_scaling() {
        assert_eq!(flower_scaled_spectrum(0.0, 9).unwrap().values, disk_spectrum(9).unwrap().values);
        let s = flower_scaled_spectrum(0.1, 9).unwrap();
        assert!((s.values[1] - 1.0 / 1.1).abs() < 1e-15);
        assert_eq!(s.multiplicities, disk_spectrum(9).unwrap().multiplicities);
        assert!(flower_scaled_spectrum(1.0, 3).is_err());
    }

    #[test]
    fn square_roots_satisfy_their_conditions() {
        let s = square_spectrum(12).unwrap();
        for r in &s.roots {
            assert!(r.residual <= 1e-12, "{r:?}");
        }
        assert_eq!(s.spectrum.multiplicity_of(1.0, 1e-12), Some(1));
        assert_eq!(s.spectrum.multiplicity_of(0.0, 0.0), Some(1));
        let v = &s.spectrum.values;
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(v.len(), 12);
    }

    #[test]
    fn square_leading_values() {
        let s = square_spectrum(8).unwrap();
        let expected = [0.0, 0.688253, 0.688253, 1.0, 2.323638, 2.323638, 2.390389, 2.390389];
        for (v, e) in s.spectrum.values.iter().zip(expected) {
            assert!((v - e).abs() < 1e-6, "{v} vs {e}");
        }
        let roots = s.sorted_roots();
        for (r, e) in roots.iter().zip([0.938, 0.938, 2.347, 2.347, 2.365, 2.365]) {
            assert!((r - e).abs() < 5e-4, "{r} vs {e}");
        }
    }

    /// Weinstock: `λ₂ |∂Ω| ≤ 2π` for simply connected domains (perimeter 8).
    #[test]
    fn square_respects_weinstock() {
        let s = square_spectrum(4).unwrap();
        assert!(s.spectrum.values[1] * 8.0 <= 2.0 * PI);
    }

    /// Independent bracketing: scan for sign changes of `tan α − tanh α`
    /// away from the poles of `tan`.
    #[test]
    fn sin_sinh_roots_lie_in_expected_intervals() {
        let s = square_spectrum(10).unwrap();
        let f = |a: f64| a.tan() - a.tanh();
        let steps = 200_000;
        let (a0, a1) = (0.1, 10.0 * PI);
        let mut found = Vec::new();
        let mut prev = f(a0);
        for i in 1..=steps {
            let a = a0 + (a1 - a0) * i as f64 / steps as f64;
            let v = f(a);
            if prev < 0.0 && v > 0.0 && (a.cos()).abs() > 1e-3 {
                found.push(a);
            }
            prev = v;
        }
        let ours: Vec<f64> = s
            .roots
            .iter()
            .filter(|r| r.family == SquareFamily::SinSinh)
            .map(|r| r.alpha)
            .collect();
        assert!(!ours.is_empty());
        for (k, a) in ours.iter().enumerate() {
            let kf = (k + 1) as f64;
            assert!(*a > kf * PI && *a < kf * PI + PI / 2.0);
            assert!(found.iter().any(|g| (g - a).abs() < 1e-3), "{a}");
        }
    }

    #[test]
    fn annulus_radial_mode() {
        let a = annulus_radial_eigenvalue(0.5).unwrap();
        assert!((a.lambda - 3.0 / (2.0_f64.ln())).abs() < 1e-12);
        assert_eq!(a.matches, FormulaMatch::EigenfunctionImplied);
        // f(r) = A log r + 1 with A = λ satisfies both conditions
        let (eps, lambda) = (0.5, a.lambda);
        let f = |r: f64| lambda * r.ln() + 1.0;
        assert!((lambda - lambda * f(1.0)).abs() < 1e-12);
        assert!((-lambda / eps - lambda * f(eps)).abs() < 1e-12);

        let near_one = annulus_radial_eigenvalue(0.99).unwrap();
        assert!(near_one.lambda.is_finite() && near_one.lambda > 0.0);
        assert!(annulus_radial_eigenvalue(1.0).is_err());
        assert!(annulus_radial_eigenvalue(0.0).is_err());
    }

    #[test]
    fn upper_bounds() {
        assert_eq!(steklov_neumann_upper_bound(1, 3.0).unwrap().bound, 0.0);
        let b = steklov_neumann_upper_bound(3, 2.0 * PI).unwrap();
        assert!((b.bound - 2.0).abs() < 1e-15);
        assert!((b.strict_third.unwrap() - 2.0).abs() < 1e-15);
        assert!((steklov_neumann_upper_bound(2, PI).unwrap().bound - 2.0).abs() < 1e-15);
        assert!(steklov_neumann_upper_bound(0, 1.0).is_err());
    }

    #[test]
    fn disk_greens_reference_values() {
        let xs = Vec2::new(-0.9, 0.0);
        let v = disk_greens(xs, Vec2::new(0.0, 0.9), 2.5).unwrap();
        assert!((v - (-0.42875)).abs() < 1e-5, "{v}");
        // symmetric in its two points
        let a = Vec2::new(0.3, -0.4);
        let b = Vec2::new(-0.1, 0.6);
        assert!((disk_greens(a, b, 1.7).unwrap() - disk_greens(b, a, 1.7).unwrap()).abs() < 1e-13);
        assert!(disk_greens(xs, Vec2::new(0.0, 0.5), 2.0).is_err());
    }
}
