//! Steklov–Neumann spectrum of an operator set under a partition mask.
//!
//! The pencil is posed on boundary values: with the energy matrix `E` of the
//! operator set and the Steklov weights `W_S` of the mask,
//! `E f = λ W_S f`. Nodes carrying no Steklov weight are eliminated by a Schur
//! complement, which leaves a symmetric positive semidefinite standard
//! eigenproblem on the remaining nodes. Every eigenvalue is therefore real and
//! finite; no infinite modes are generated by the Neumann rows.

use faer::prelude::*;
use faer::{Mat, Side};

use crate::discretization::{
    l2_inner_product, Evaluation, OperatorSet, PartitionMask, Region, STEKLOV_FRACTION_FLOOR,
};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRequest {
    pub count: usize,
    /// Relative gap `cluster_tol·(1 + λ)` below which neighbours share a cluster.
    pub cluster_tol: f64,
    pub spurious_cutoff: f64,
}

impl SpectrumRequest {
    pub fn new(count: usize) -> Self {
        Self {
            count,
            cluster_tol: 1e-6,
            spurious_cutoff: 1e6,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 || !(self.cluster_tol > 0.0) || !(self.spurious_cutoff > 0.0) {
            return Err(Error::InvalidInput(format!("invalid spectrum request {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Single-layer density `φ`; the eigenfunction is `S[φ] + constant`.
    pub density: Vec<f64>,
    pub constant: f64,
    /// Eigenfunction values at the nodes.
    pub trace: Vec<f64>,
    pub cluster_id: usize,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub pairs: Vec<EigenPair>,
    /// Every eigenvalue of the discrete pencil, ascending.
    all_values: Vec<f64>,
}

impl Spectrum {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn all_values(&self) -> &[f64] {
        &self.all_values
    }

    pub fn cluster(&self, id: usize) -> Vec<EigenPair> {
        self.pairs.iter().filter(|p| p.cluster_id == id).cloned().collect()
    }

    pub fn cluster_count(&self) -> usize {
        self.pairs.last().map_or(0, |p| p.cluster_id + 1)
    }

    /// Eigenvalue of the full discrete spectrum closest to `lambda`.
    pub fn nearest(&self, lambda: f64) -> Option<f64> {
        nearest_value(&self.all_values, lambda)
    }
}

pub(crate) fn nearest_value(values: &[f64], lambda: f64) -> Option<f64> {
    values
        .iter()
        .cloned()
        .min_by(|a, b| (a - lambda).abs().total_cmp(&(b - lambda).abs()))
}

/// The Schur-reduced symmetric problem for one mask.
struct Reduction {
    active: Vec<usize>,
    passive: Vec<usize>,
    inv_sqrt_weight: Vec<f64>,
    /// `E_ZZ⁻¹ E_ZP`, used to recover passive values.
    passive_map: Option<Mat<f64>>,
    matrix: Mat<f64>,
}

fn reduce(ops: &OperatorSet, mask: &PartitionMask) -> Result<Reduction> {
    let n = ops.len();
    if mask.fractions().len() != n {
        return Err(Error::Mask("mask does not belong to this operator set".into()));
    }
    let ws = mask.steklov_weights();
    let (active, passive): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&j| mask.fractions()[j] > STEKLOV_FRACTION_FLOOR);
    if active.is_empty() {
        return Err(Error::Mask("no node carries Steklov weight".into()));
    }
    let e = ops.energy();
    let na = active.len();
    let inv_sqrt_weight: Vec<f64> = active.iter().map(|&j| 1.0 / ws[j].sqrt()).collect();

    let mut schur = Mat::from_fn(na, na, |a, b| e[(active[a], active[b])]);
    let passive_map = if passive.is_empty() {
        None
    } else {
        let np = passive.len();
        let ezz = Mat::from_fn(np, np, |a, b| e[(passive[a], passive[b])]);
        let ezp = Mat::from_fn(np, na, |a, b| e[(passive[a], active[b])]);
        let llt = ezz
            .llt(Side::Lower)
            .map_err(|err| Error::EigenDecomposition(format!("Neumann block not definite: {err:?}")))?;
        let map = llt.solve(&ezp);
        let correction = ezp.transpose() * &map;
        schur -= &correction;
        Some(map)
    };
    let matrix = Mat::from_fn(na, na, |a, b| {
        0.5 * (schur[(a, b)] + schur[(b, a)]) * inv_sqrt_weight[a] * inv_sqrt_weight[b]
    });
    Ok(Reduction {
        active,
        passive,
        inv_sqrt_weight,
        passive_map,
        matrix,
    })
}

/// All eigenvalues of the mask's pencil, ascending; no eigenvectors.
pub fn spectrum_values(ops: &OperatorSet, mask: &PartitionMask) -> Result<Vec<f64>> {
    let red = reduce(ops, mask)?;
    let vals = red
        .matrix
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::EigenDecomposition(format!("{e:?}")))?;
    let mut vals: Vec<f64> = vals.into_iter().filter(|v| v.is_finite()).collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn solve_spectrum(ops: &OperatorSet, mask: &PartitionMask, req: &SpectrumRequest) -> Result<Spectrum> {
    req.validate()?;
    let red = reduce(ops, mask)?;
    let evd = red
        .matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigenDecomposition(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..s.nrows())
        .filter(|&k| s[k].is_finite() && s[k].abs() <= req.spurious_cutoff)
        .collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    if order.is_empty() {
        return Err(Error::EigenDecomposition("every eigenvalue was discarded".into()));
    }
    let all_values: Vec<f64> = order.iter().map(|&k| s[k]).collect();
    let keep = &order[..req.count.min(order.len())];

    let n = ops.len();
    let na = red.active.len();
    let mut traces = Mat::<f64>::zeros(n, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        let fp: Vec<f64> = (0..na).map(|a| u[(a, k)] * red.inv_sqrt_weight[a]).collect();
        for (a, &j) in red.active.iter().enumerate() {
            traces[(j, c)] = fp[a];
        }
        if let Some(map) = &red.passive_map {
            for (z, &j) in red.passive.iter().enumerate() {
                traces[(j, c)] = -(0..na).map(|a| map[(z, a)] * fp[a]).sum::<f64>();
            }
        }
    }
    let densities = ops.trace_to_density() * &traces;
    let crow = ops.constant_row();

    let mut pairs = Vec::with_capacity(keep.len());
    let mut cluster_id = 0;
    for (c, &k) in keep.iter().enumerate() {
        let value = s[k];
        if let Some(prev) = pairs.last().map(|p: &EigenPair| p.value) {
            if value - prev > req.cluster_tol * (1.0 + prev.abs()) {
                cluster_id += 1;
            }
        }
        let trace: Vec<f64> = (0..n).map(|j| traces[(j, c)]).collect();
        let density: Vec<f64> = (0..n).map(|j| densities[(j, c)]).collect();
        let constant = crow.iter().zip(&trace).map(|(a, b)| a * b).sum();
        let mut pair = EigenPair {
            value,
            density,
            constant,
            trace,
            cluster_id,
        };
        fix_sign(&mut pair);
        pairs.push(pair);
    }
    Ok(Spectrum { pairs, all_values })
}

fn fix_sign(pair: &mut EigenPair) {
    let pivot = pair
        .trace
        .iter()
        .cloned()
        .fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if pivot < 0.0 {
        pair.trace.iter_mut().for_each(|v| *v = -*v);
        pair.density.iter_mut().for_each(|v| *v = -*v);
        pair.constant = -pair.constant;
    }
}

/// Eigenpairs of one cluster whose traces are orthonormal in `L²(Γ_S)`.
#[derive(Debug, Clone)]
pub struct OrthonormalCluster {
    pairs: Vec<EigenPair>,
}

impl OrthonormalCluster {
    pub fn pairs(&self) -> &[EigenPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Mean eigenvalue of the cluster.
    pub fn value(&self) -> f64 {
        self.pairs.iter().map(|p| p.value).sum::<f64>() / self.pairs.len() as f64
    }

    /// Trace values of every member at one node.
    pub fn values_at(&self, node: usize) -> Vec<f64> {
        self.pairs.iter().map(|p| p.trace[node]).collect()
    }
}

/// Modified Gram–Schmidt in the `L²(Γ_S)` quadrature inner product.
pub fn orthonormalize_cluster(
    pairs: &[EigenPair],
    ops: &OperatorSet,
    mask: &PartitionMask,
) -> Result<OrthonormalCluster> {
    let Some(first) = pairs.first() else {
        return Err(Error::Cluster("empty cluster".into()));
    };
    if pairs.iter().any(|p| p.cluster_id != first.cluster_id) {
        return Err(Error::Cluster("pairs belong to different clusters".into()));
    }
    let ip = |a: &[f64], b: &[f64]| l2_inner_product(ops, mask, Region::Steklov, a, b);
    let mut out: Vec<EigenPair> = Vec::with_capacity(pairs.len());
    for p in pairs {
        let mut q = p.clone();
        let norm0 = ip(&q.trace, &q.trace).sqrt();
        for _ in 0..2 {
            for b in &out {
                let c = ip(&q.trace, &b.trace);
                axpy(&mut q, -c, b);
            }
        }
        let norm = ip(&q.trace, &q.trace).sqrt();
        if !(norm > 1e-8 * norm0.max(f64::MIN_POSITIVE)) || norm0 == 0.0 {
            return Err(Error::Cluster(format!(
                "traces are numerically dependent (residual norm {norm:e})"
            )));
        }
        scale(&mut q, 1.0 / norm);
        fix_sign(&mut q);
        out.push(q);
    }
    Ok(OrthonormalCluster { pairs: out })
}

fn axpy(q: &mut EigenPair, c: f64, b: &EigenPair) {
    q.trace.iter_mut().zip(&b.trace).for_each(|(x, y)| *x += c * y);
    q.density.iter_mut().zip(&b.density).for_each(|(x, y)| *x += c * y);
    q.constant += c * b.constant;
}

fn scale(q: &mut EigenPair, c: f64) {
    q.trace.iter_mut().for_each(|x| *x *= c);
    q.density.iter_mut().for_each(|x| *x *= c);
    q.constant *= c;
}

/// Value of the eigenfunction at an interior point.
pub fn eval_eigenfunction_at(pair: &EigenPair, ops: &OperatorSet, x: Vec2) -> Result<Evaluation> {
    ops.eval_layer_potential(&pair.density, pair.constant, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble, mask_from_partition, Accuracy};
    use crate::geometry::{ArcSpec, BoundaryCurve, BoundaryPartition, Label, TWO_PI};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn all_steklov(ops: &OperatorSet) -> PartitionMask {
        mask_from_partition(ops, &BoundaryPartition::all_steklov()).unwrap()
    }

    #[test]
    fn disk_spectrum() {
        let ops = assemble(&BoundaryCurve::unit_circle(), 256).unwrap();
        let sp = solve_spectrum(&ops, &all_steklov(&ops), &SpectrumRequest::new(9)).unwrap();
        let expected = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0];
        for (v, e) in sp.values().iter().zip(expected) {
            assert!((v - e).abs() < 1e-6, "{v} vs {e}");
        }
        let ids: Vec<usize> = sp.pairs.iter().map(|p| p.cluster_id).collect();
        assert_eq!(ids, vec![0, 1, 1, 2, 2, 3, 3, 4, 4]);
        assert!(sp.pairs[0].value.abs() < 1e-8);
    }

    #[test]
    fn traces_match_the_representation() {
        let ops = assemble(&BoundaryCurve::Kite, 128).unwrap();
        let sp = solve_spectrum(&ops, &all_steklov(&ops), &SpectrumRequest::new(5)).unwrap();
        for p in &sp.pairs {
            let back = ops.boundary_trace(&p.density, p.constant);
            for (a, b) in back.iter().zip(&p.trace) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn scaled_disk() {
        let eps = 0.1;
        let ops = assemble(&BoundaryCurve::flower(eps, 0).unwrap(), 256).unwrap();
        let sp = solve_spectrum(&ops, &all_steklov(&ops), &SpectrumRequest::new(9)).unwrap();
        let expected = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0];
        for (v, e) in sp.values().iter().zip(expected) {
            assert!((v - e / (1.0 + eps)).abs() < 1e-5);
        }
    }

    #[test]
    fn half_neumann_circle_respects_bound() {
        let ops = assemble(&BoundaryCurve::unit_circle(), 256).unwrap();
        let p = BoundaryPartition::from_neumann_arcs(&[(0.0, PI)]).unwrap();
        let mask = mask_from_partition(&ops, &p).unwrap();
        let sp = solve_spectrum(&ops, &mask, &SpectrumRequest::new(10)).unwrap();
        for (j, v) in sp.values().iter().enumerate() {
            assert!(*v <= 2.0 * PI * j as f64 / PI + 1e-6);
            assert!(*v >= -1e-8);
        }
        assert!(sp.values()[2] < 4.0);
    }

    /// Pairs `λ_{2k}, λ_{2k+1}` of a smooth curve approach `2πk/|∂Ω|`.
    #[test]
    fn weyl_pairs_on_the_circle() {
        let n = 256;
        let ops = assemble(&BoundaryCurve::unit_circle(), n).unwrap();
        let sp = solve_spectrum(&ops, &all_steklov(&ops), &SpectrumRequest::new(n / 8 + 1)).unwrap();
        for (j, v) in sp.values().iter().enumerate().skip(1) {
            let weyl = TWO_PI * ((j + 1) / 2) as f64 / ops.perimeter();
            assert!(((v - weyl) / weyl).abs() < 1e-3, "j={j} {v} {weyl}");
        }
    }

    #[test]
    fn weyl_pairs_on_the_kite() {
        let ops = assemble(&BoundaryCurve::Kite, 256).unwrap();
        let sp = solve_spectrum(&ops, &all_steklov(&ops), &SpectrumRequest::new(41)).unwrap();
        let v = sp.values();
        let rel = |j: usize| {
            let weyl = TWO_PI * (j / 2) as f64 / ops.perimeter();
            ((v[j - 1] - weyl) / weyl).abs()
        };
        assert!(rel(40) < rel(20) && rel(20) < rel(10));
        assert!(rel(40) < 1e-2, "{}", rel(40));
    }

    #[test]
    fn orthonormal_simple_and_double() {
        let ops = assemble(&BoundaryCurve::unit_circle(), 128).unwrap();
        let mask = all_steklov(&ops);
        let sp = solve_spectrum(&ops, &mask, &SpectrumRequest::new(5)).unwrap();

        let mut scaled = sp.pairs[0].clone();
        scale(&mut scaled, 3.0);
        let one = orthonormalize_cluster(&[scaled], &ops, &mask).unwrap();
        let nrm = l2_inner_product(&ops, &mask, Region::Steklov, &one.pairs()[0].trace, &one.pairs()[0].trace);
        assert!((nrm - 1.0).abs() < 1e-12);

        let cl = orthonormalize_cluster(&sp.cluster(1), &ops, &mask).unwrap();
        assert_eq!(cl.len(), 2);
        for a in cl.pairs() {
            for b in cl.pairs() {
                let g = l2_inner_product(&ops, &mask, Region::Steklov, &a.trace, &b.trace);
                let id = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                assert!((g - id).abs() < 1e-8);
            }
        }
        // span{cos θ, sin θ}
        let c: Vec<f64> = ops.nodes().params.iter().map(|t| t.cos() / PI.sqrt()).collect();
        let s: Vec<f64> = ops.nodes().params.iter().map(|t| t.sin() / PI.sqrt()).collect();
        for p in cl.pairs() {
            let a = l2_inner_product(&ops, &mask, Region::Steklov, &p.trace, &c);
            let b = l2_inner_product(&ops, &mask, Region::Steklov, &p.trace, &s);
            for (j, v) in p.trace.iter().enumerate() {
                assert!((v - a * c[j] - b * s[j]).abs() < 1e-6);
            }
        }

        let dup = vec![sp.pairs[1].clone(), sp.pairs[1].clone()];
        assert!(matches!(orthonormalize_cluster(&dup, &ops, &mask), Err(Error::Cluster(_))));
    }

    #[test]
    fn interior_eigenfunction_values() {
        let ops = assemble(&BoundaryCurve::unit_circle(), 128).unwrap();
        let sp = solve_spectrum(&ops, &all_steklov(&ops), &SpectrumRequest::new(5)).unwrap();
        let p1 = &sp.pairs[1];
        let origin = eval_eigenfunction_at(p1, &ops, Vec2::new(0.0, 0.0)).unwrap();
        assert!(origin.value.abs() < 1e-12);
        assert_eq!(origin.accuracy, Accuracy::Resolved);
        // u = r g(θ) for λ = 1 and r² g(θ) for λ = 2
        for j in [0, 17, 70] {
            let dir = ops.nodes().points[j];
            let v = eval_eigenfunction_at(p1, &ops, dir * 0.5).unwrap().value;
            assert!((v - 0.5 * p1.trace[j]).abs() < 1e-10);
            let p3 = &sp.pairs[3];
            let a = eval_eigenfunction_at(p3, &ops, dir * 0.3).unwrap().value;
            let b = eval_eigenfunction_at(p3, &ops, dir * 0.6).unwrap().value;
            if a.abs() > 1e-3 {
                assert!((b / a - 4.0).abs() < 1e-8);
            }
        }
    }

    fn random_partition(ops: &OperatorSet, centers: &[f64], lens: &[f64]) -> Option<BoundaryPartition> {
        let mut p = BoundaryPartition::all_steklov();
        for (c, l) in centers.iter().zip(lens) {
            p = p
                .insert_neumann_arc(ops.arclength(), ArcSpec { center: *c, half_length: *l })
                .ok()?
                .0;
        }
        Some(p)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn zero_mode_and_bounds(
            centers in proptest::collection::vec(0.0..TWO_PI, 1..3),
            lens in proptest::collection::vec(0.05..1.0f64, 2),
        ) {
            let ops = assemble(&BoundaryCurve::Kite, 96).unwrap();
            let Some(p) = random_partition(&ops, &centers, &lens) else { return Ok(()) };
            let mask = mask_from_partition(&ops, &p).unwrap();
            let sp = solve_spectrum(&ops, &mask, &SpectrumRequest::new(8)).unwrap();
            let gs = p.total_length(ops.arclength(), Label::Steklov);
            let z = &sp.pairs[0];
            prop_assert!(z.value.abs() <= 1e-8);
            let mean = z.trace[0];
            for (t, s) in z.trace.iter().zip(mask.fractions()) {
                if *s > 0.0 { prop_assert!(((t - mean) / mean).abs() < 1e-6); }
            }
            for (j, v) in sp.values().iter().enumerate() {
                prop_assert!(*v <= TWO_PI * j as f64 / gs + 1e-6);
            }
            prop_assert!(sp.values()[2] < 2.0 * TWO_PI / gs);
        }

        #[test]
        fn eigenvalues_grow_with_the_neumann_arc(
            center in 0.0..TWO_PI,
            eps in 0.0..0.6f64,
            delta in 0.001..0.3f64,
        ) {
            let ops = assemble(&BoundaryCurve::Kite, 96).unwrap();
            let (p, id) = BoundaryPartition::all_steklov()
                .insert_neumann_arc(ops.arclength(), ArcSpec { center, half_length: eps })
                .unwrap();
            let q = p.extend_neumann_arc(ops.arclength(), id, delta).unwrap();
            let a = spectrum_values(&ops, &mask_from_partition(&ops, &p).unwrap()).unwrap();
            let b = spectrum_values(&ops, &mask_from_partition(&ops, &q).unwrap()).unwrap();
            for j in 0..10 {
                prop_assert!(b[j] >= a[j] - 1e-8, "j={} {} {}", j, a[j], b[j]);
            }
        }
    }
}
