//! Reference checks of the solver against closed-form oracles and structural
//! invariants.
//!
//! The suite takes the assembler as a parameter so that deliberately broken
//! operator sets can be fed through it.

use serde::Serialize;

use crate::discretization::{assemble, mask_from_partition, OperatorSet};
use crate::eigensolver::spectrum_values;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, BoundaryPartition, Label, Vec2, TWO_PI};
use crate::greens::{eval_greens, solve_greens};
use crate::oracles::{disk_greens, disk_spectrum, flower_scaled_spectrum, square_spectrum, steklov_neumann_upper_bound};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Error message when the check could not be evaluated.
    pub error: Option<String>,
}

impl CheckResult {
    fn from_residual(name: &'static str, threshold: f64, residual: Result<f64>) -> Self {
        match residual {
            Ok(r) => Self {
                name,
                residual: r,
                threshold,
                passed: r <= threshold,
                error: None,
            },
            Err(e) => Self {
                name,
                residual: f64::INFINITY,
                threshold,
                passed: false,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width text table, one line per check.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<28} {:>12} {:>12}  status\n", "check", "residual", "threshold");
        for c in &self.checks {
            out.push_str(&format!(
                "{:<28} {:>12.3e} {:>12.3e}  {}",
                c.name,
                c.residual,
                c.threshold,
                if c.passed { "PASS" } else { "FAIL" }
            ));
            if let Some(e) = &c.error {
                out.push_str(&format!("  ({e})"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn run_suite() -> ValidationReport {
    run_suite_with(assemble)
}

pub fn run_suite_with(assembler: impl Fn(&BoundaryCurve, usize) -> Result<OperatorSet>) -> ValidationReport {
    let checks = vec![
        CheckResult::from_residual("disk_spectrum", 1e-6, disk_spectrum_error(&assembler)),
        CheckResult::from_residual("square_residuals", 1e-12, square_residual()),
        CheckResult::from_residual("flower_scaling", 1e-5, flower_scaling_error(&assembler)),
        CheckResult::from_residual("partition_bounds", 1e-6, bound_excess(&assembler)),
        CheckResult::from_residual("disk_greens", 1e-8, disk_greens_error(&assembler)),
        CheckResult::from_residual("kite_reciprocity", 1e-8, kite_reciprocity_error(&assembler)),
        CheckResult::from_residual("kite_gauss_flux", 1e-10, kite_gauss_flux_error(&assembler)),
    ];
    ValidationReport { checks }
}

fn disk_spectrum_error(assembler: &impl Fn(&BoundaryCurve, usize) -> Result<OperatorSet>) -> Result<f64> {
    let ops = assembler(&BoundaryCurve::unit_circle(), 128)?;
    let mask = mask_from_partition(&ops, &BoundaryPartition::all_steklov())?;
    let values = spectrum_values(&ops, &mask)?;
    max_difference(&values, &disk_spectrum(9)?.values)
}

fn square_residual() -> Result<f64> {
    let sq = square_spectrum(12)?;
    Ok(sq.roots.iter().map(|r| r.residual).fold(0.0, f64::max))
}

fn flower_scaling_error(assembler: &impl Fn(&BoundaryCurve, usize) -> Result<OperatorSet>) -> Result<f64> {
    let ops = assembler(&BoundaryCurve::circle(1.1)?, 128)?;
    let mask = mask_from_partition(&ops, &BoundaryPartition::all_steklov())?;
    let values = spectrum_values(&ops, &mask)?;
    max_difference(&values, &flower_scaled_spectrum(0.1, 9)?.values)
}

fn bound_excess(assembler: &impl Fn(&BoundaryCurve, usize) -> Result<OperatorSet>) -> Result<f64> {
    let ops = assembler(&BoundaryCurve::unit_circle(), 128)?;
    let mut excess = 0.0_f64;
    for arcs in [vec![(0.3, 1.2)], vec![(1.0, 1.5), (3.0, 4.5)], vec![(5.0, 5.0 + 0.4 * TWO_PI)]] {
        let p = BoundaryPartition::from_neumann_arcs(&arcs)?;
        let mask = mask_from_partition(&ops, &p)?;
        let len = p.total_length(ops.arclength(), Label::Steklov);
        let values = spectrum_values(&ops, &mask)?;
        for (i, v) in values.iter().take(8).enumerate() {
            let b = steklov_neumann_upper_bound(i + 1, len)?;
            excess = excess.max(v - b.bound);
            if let Some(third) = b.strict_third {
                if *v >= third {
                    excess = f64::INFINITY;
                }
            }
        }
    }
    Ok(excess.max(0.0))
}

fn disk_greens_error(assembler: &impl Fn(&BoundaryCurve, usize) -> Result<OperatorSet>) -> Result<f64> {
    let ops = assembler(&BoundaryCurve::unit_circle(), 256)?;
    let mask = mask_from_partition(&ops, &BoundaryPartition::all_steklov())?;
    let xs = Vec2::new(-0.9, 0.0);
    let field = solve_greens(&ops, &mask, xs, 2.5)?;
    let mut err = 0.0_f64;
    for r in [0.1, 0.5, 0.9] {
        let y = Vec2::new(0.0, r);
        err = err.max((eval_greens(&field, &ops, y)?.value - disk_greens(xs, y, 2.5)?).abs());
    }
    Ok(err)
}

fn kite_reciprocity_error(assembler: &impl Fn(&BoundaryCurve, usize) -> Result<OperatorSet>) -> Result<f64> {
    let ops = assembler(&BoundaryCurve::Kite, 256)?;
    let p = BoundaryPartition::from_neumann_arcs(&[(4.0, 5.0)])?;
    let mask = mask_from_partition(&ops, &p)?;
    let points = [Vec2::new(-0.5, 0.3), Vec2::new(0.4, -0.6), Vec2::new(-1.2, 1.0)];
    let fields: Vec<_> = points
        .iter()
        .map(|&x| solve_greens(&ops, &mask, x, 1.7))
        .collect::<Result<_>>()?;
    let mut err = 0.0_f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let a = eval_greens(&fields[i], &ops, points[j])?.value;
            let b = eval_greens(&fields[j], &ops, points[i])?.value;
            err = err.max((a - b).abs());
        }
    }
    Ok(err)
}

/// `wᵀ K* = ½ wᵀ`: the flux of `Γ⁰(·, y)` through the boundary is 1 for every
/// boundary point `y`.
fn kite_gauss_flux_error(assembler: &impl Fn(&BoundaryCurve, usize) -> Result<OperatorSet>) -> Result<f64> {
    let ops = assembler(&BoundaryCurve::Kite, 256)?;
    let k = ops.adjoint_double_layer();
    let w = ops.weights();
    let n = ops.len();
    Ok((0..n)
        .map(|j| ((0..n).map(|i| w[i] * k[(i, j)]).sum::<f64>() - 0.5 * w[j]).abs() / w[j])
        .fold(0.0, f64::max))
}

fn max_difference(computed: &[f64], expected: &[f64]) -> Result<f64> {
    if computed.len() < expected.len() {
        return Err(Error::EigenDecomposition(format!(
            "only {} eigenvalues for {} reference values",
            computed.len(),
            expected.len()
        )));
    }
    Ok(computed.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Fitted order `p` of `residual ≈ C hᵖ`.
pub fn observed_order(steps: &[f64], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = steps
        .iter()
        .zip(residuals)
        .map(|(h, r)| (h.ln(), r.abs().ln()))
        .collect();
    least_squares_slope(&pts)
}
