//! First-order predictions for flipping a short Steklov arc of half-length
//! `ε` centred at `c★` to Neumann.
//!
//! The functions are plain formulas over values supplied by the caller and
//! never trigger solves.

use serde::Serialize;

use crate::eigensolver::OrthonormalCluster;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationPrediction {
    pub base_eigenvalue: f64,
    pub predicted_eigenvalue: f64,
    pub eigenfunction_values_at_center: Vec<f64>,
    pub epsilon: f64,
    pub order_note: &'static str,
}

impl PerturbationPrediction {
    pub fn shift(&self) -> f64 {
        self.predicted_eigenvalue - self.base_eigenvalue
    }
}

/// `λ⁰ + 2ελ⁰ Σ u_i(c★)²` for an orthonormal cluster basis.
pub fn predict_eigenvalue_shift(lambda0: f64, center_values: &[f64], epsilon: f64) -> Result<PerturbationPrediction> {
    if !(lambda0 >= 0.0) || !(epsilon >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need lambda0 ≥ 0 and epsilon ≥ 0, got {lambda0}, {epsilon}"
        )));
    }
    let sum_sq: f64 = center_values.iter().map(|u| u * u).sum();
    let order_note = if sum_sq == 0.0 {
        "o(eps^2): the cluster vanishes at the centre"
    } else {
        "O(eps^2)"
    };
    Ok(PerturbationPrediction {
        base_eigenvalue: lambda0,
        predicted_eigenvalue: lambda0 + 2.0 * epsilon * lambda0 * sum_sq,
        eigenfunction_values_at_center: center_values.to_vec(),
        epsilon,
        order_note,
    })
}

/// Eigenvalue prediction for an arc centred at node `center`.
pub fn predict_from_cluster(cluster: &OrthonormalCluster, center: usize, epsilon: f64) -> Result<PerturbationPrediction> {
    predict_eigenvalue_shift(cluster.value().max(0.0), &cluster.values_at(center), epsilon)
}

/// `Σ u_i(x) u_i(c★) / (Σ u_i(c★)²)^{1/2}`.
pub fn predict_eigenfunction_limit(center_values: &[f64], query_values: &[f64]) -> Result<f64> {
    if center_values.len() != query_values.len() {
        return Err(Error::InvalidInput("value lists differ in length".into()));
    }
    let norm = center_values.iter().map(|u| u * u).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::UndefinedLimit(
            "every cluster member vanishes at the arc centre".into(),
        ));
    }
    Ok(center_values.iter().zip(query_values).map(|(c, q)| c * q).sum::<f64>() / norm)
}

/// Limit eigenfunction trace at every node for an arc centred at node `center`.
pub fn eigenfunction_limit_trace(cluster: &OrthonormalCluster, center: usize) -> Result<Vec<f64>> {
    let c = cluster.values_at(center);
    let n = cluster.pairs()[0].trace.len();
    (0..n)
        .map(|j| predict_eigenfunction_limit(&c, &cluster.values_at(j)))
        .collect()
}

/// `S(x_S, y) + 2λε S(x_S, c★) S(y, c★)`.
pub fn predict_greens_perturbation(s_xy: f64, s_xc: f64, s_yc: f64, lambda: f64, epsilon: f64) -> f64 {
    s_xy + 2.0 * lambda * epsilon * s_xc * s_yc
}
