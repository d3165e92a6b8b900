//! Steklov–Neumann Green's function `S^λ(x_S, ·) = Γ⁰(x_S, ·) + R^λ`.
//!
//! The harmonic correction `R^λ` is solved for through its boundary values
//! `r`: with `E` the energy matrix, `W` the full and `W_S` the Steklov
//! quadrature weights,
//!
//! `(E − λ W_S) r = −W ∂_ν Γ⁰ + λ W_S Γ⁰`,
//!
//! which is the weak form of `∂_ν R − λ R = −∂_ν Γ⁰ + λ Γ⁰` on Γ_S and
//! `∂_ν R = −∂_ν Γ⁰` on Γ_N. The boundary values are then represented as a
//! single-layer density plus a constant for interior evaluation.

use faer::prelude::*;
use faer::Mat;

use crate::discretization::{Evaluation, OperatorSet, PartitionMask};
use crate::eigensolver::{nearest_value, spectrum_values};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, BoundaryPartition, Vec2};
use crate::kernels::{gamma0, gamma0_dnu};

/// Relative distance to an eigenvalue below which a solve is refused.
pub const RESONANCE_GUARD: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GreensField {
    pub source: Vec2,
    pub lambda: f64,
    partition: BoundaryPartition,
    curve: BoundaryCurve,
    /// Density of `R^λ` as a single-layer potential.
    pub correction_density: Vec<f64>,
    pub correction_constant: f64,
    /// `S^λ(x_S, x_j)` at every node.
    pub boundary_values: Vec<f64>,
    /// Estimate of the 1-norm condition number of the system matrix.
    pub condition_estimate: f64,
    /// Relative residual of the solved system.
    pub residual: f64,
    /// Eigenvalue of the partition nearest to `lambda`.
    pub nearest_eigenvalue: f64,
}

impl GreensField {
    pub fn partition(&self) -> &BoundaryPartition {
        &self.partition
    }
}

/// Solves for the Green's function, computing the partition's eigenvalues
/// for the resonance guard.
pub fn solve_greens(ops: &OperatorSet, mask: &PartitionMask, source: Vec2, lambda: f64) -> Result<GreensField> {
    let eigenvalues = spectrum_values(ops, mask)?;
    solve_greens_guarded(ops, mask, &eigenvalues, source, lambda)
}

/// As [`solve_greens`], reusing eigenvalues already computed for `mask`.
pub fn solve_greens_guarded(
    ops: &OperatorSet,
    mask: &PartitionMask,
    eigenvalues: &[f64],
    source: Vec2,
    lambda: f64,
) -> Result<GreensField> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidInput(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    if !ops.contains(source)? {
        return Err(Error::InvalidInput(format!("source {source:?} is not inside the domain")));
    }
    let nearest = nearest_value(eigenvalues, lambda)
        .ok_or_else(|| Error::EigenDecomposition("empty spectrum".into()))?;
    if (lambda - nearest).abs() < RESONANCE_GUARD * (1.0 + nearest.abs()) {
        return Err(Error::Resonance { lambda, nearest });
    }

    let n = ops.len();
    let nodes = ops.nodes();
    let w = ops.weights();
    let ws = mask.steklov_weights();
    let e = ops.energy();
    let mut g0 = Vec::with_capacity(n);
    let mut rhs = Mat::<f64>::zeros(n, 1);
    for j in 0..n {
        let x = nodes.points[j];
        let g = gamma0(x, source)?;
        let dg = gamma0_dnu(x, nodes.normals[j], source)?;
        rhs[(j, 0)] = -w[j] * dg + lambda * ws[j] * g;
        g0.push(g);
    }
    let a = Mat::from_fn(n, n, |i, j| e[(i, j)] - if i == j { lambda * ws[i] } else { 0.0 });
    let lu = a.partial_piv_lu();
    let sol = lu.solve(&rhs);
    let r: Vec<f64> = (0..n).map(|j| sol[(j, 0)]).collect();
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Resonance { lambda, nearest });
    }

    let ar = &a * &sol;
    let res_norm = (0..n).map(|i| (ar[(i, 0)] - rhs[(i, 0)]).abs()).fold(0.0, f64::max);
    let a_norm = one_norm(&a);
    let r_norm = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let b_norm = (0..n).map(|i| rhs[(i, 0)].abs()).fold(0.0, f64::max);
    let residual = res_norm / (a_norm * r_norm + b_norm).max(f64::MIN_POSITIVE);
    let inv_norm = hager_inverse_norm(n, |v| lu.solve(v));
    let condition_estimate = a_norm * inv_norm;

    let (correction_density, correction_constant) = ops.represent(&r);
    let boundary_values = g0.iter().zip(&r).map(|(a, b)| a + b).collect();
    Ok(GreensField {
        source,
        lambda,
        partition: mask.partition().clone(),
        curve: ops.curve().clone(),
        correction_density,
        correction_constant,
        boundary_values,
        condition_estimate,
        residual,
        nearest_eigenvalue: nearest,
    })
}

fn one_norm(a: &Mat<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Hager's estimate of `‖A⁻¹‖₁` for a symmetric `A`, given a solver.
fn hager_inverse_norm(n: usize, solve: impl Fn(&Mat<f64>) -> Mat<f64>) -> f64 {
    let mut x = Mat::from_fn(n, 1, |_, _| 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = solve(&x);
        let norm: f64 = (0..n).map(|i| y[(i, 0)].abs()).sum();
        if norm <= estimate {
            break;
        }
        estimate = norm;
        let xi = Mat::from_fn(n, 1, |i, _| if y[(i, 0)] >= 0.0 { 1.0 } else { -1.0 });
        let z = solve(&xi);
        let (jmax, zmax) = (0..n)
            .map(|i| (i, z[(i, 0)].abs()))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        let ztx: f64 = (0..n).map(|i| z[(i, 0)] * x[(i, 0)]).sum();
        if zmax <= ztx {
            break;
        }
        x = Mat::from_fn(n, 1, |i, _| if i == jmax { 1.0 } else { 0.0 });
    }
    estimate
}

/// `S^λ(x_S, y)` at an interior point, or at a node when `y` coincides with one.
pub fn eval_greens(field: &GreensField, ops: &OperatorSet, y: Vec2) -> Result<Evaluation> {
    if y.distance(field.source) == 0.0 {
        return Err(Error::Singularity("evaluation point equals the source".into()));
    }
    let (j, d) = ops.nearest_node(y);
    if d <= 1e-14 * (1.0 + y.norm()) {
        return Ok(Evaluation {
            value: field.boundary_values[j],
            accuracy: crate::discretization::Accuracy::Resolved,
            upsampling: 1,
        });
    }
    let mut e = ops.eval_layer_potential(&field.correction_density, field.correction_constant, y)?;
    e.value += gamma0(field.source, y)?;
    Ok(e)
}

/// Node-wise product `S^λ(x_S, z) S^λ(y, z)` of two fields.
pub fn boundary_product_profile(a: &GreensField, b: &GreensField) -> Result<Vec<f64>> {
    if a.partition != b.partition
        || a.lambda != b.lambda
        || a.curve != b.curve
        || a.boundary_values.len() != b.boundary_values.len()
    {
        return Err(Error::Usage(
            "fields differ in partition, lambda or discretization".into(),
        ));
    }
    Ok(a.boundary_values
        .iter()
        .zip(&b.boundary_values)
        .map(|(x, y)| x * y)
        .collect())
}
