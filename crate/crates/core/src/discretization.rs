//! Nyström discretization of the single-layer and adjoint double-layer
//! operators on equispaced parameter nodes.
//!
//! The logarithmic singularity of the single-layer kernel is split off as
//! `log(4 sin²((t−τ)/2))` and integrated exactly against the trigonometric
//! interpolant (Kress weights); the remainder is smooth and handled by the
//! trapezoidal rule.
//!
//! Besides the two boundary operators, an [`OperatorSet`] carries the
//! trace-to-density map of the representation `u = S[φ] + c` (with the
//! normalization `∫φ = 0`) and the symmetric Dirichlet-energy matrix built from
//! it. Both are partition independent, so one set serves every mask.

use std::f64::consts::PI;

use faer::prelude::*;
use faer::Mat;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{
    curvature, point_normal_speed, ArcLengthMap, BoundaryCurve, BoundaryPartition, Label,
    Vec2, TWO_PI,
};
use crate::kernels::{gamma0_dnu_unchecked, gamma0_from_r2};

/// Nodes whose Steklov fraction is at or below this are treated as Neumann
/// by the eigensolver.
pub const STEKLOV_FRACTION_FLOOR: f64 = 1e-9;

const MAX_UPSAMPLING: usize = 64;

#[derive(Debug, Clone)]
pub struct Nodes {
    pub params: Vec<f64>,
    pub points: Vec<Vec2>,
    pub normals: Vec<Vec2>,
    pub speeds: Vec<f64>,
}

impl Nodes {
    fn sample(curve: &BoundaryCurve, n: usize) -> Result<Self> {
        let mut nodes = Nodes {
            params: Vec::with_capacity(n),
            points: Vec::with_capacity(n),
            normals: Vec::with_capacity(n),
            speeds: Vec::with_capacity(n),
        };
        for j in 0..n {
            let t = j as f64 * TWO_PI / n as f64;
            let bp = point_normal_speed(curve, t)?;
            nodes.params.push(t);
            nodes.points.push(bp.point);
            nodes.normals.push(bp.normal);
            nodes.speeds.push(bp.speed);
        }
        Ok(nodes)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }
}

/// Discretized boundary operators for one curve and node count.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    curve: BoundaryCurve,
    nodes: Nodes,
    weights: Vec<f64>,
    single_layer: Mat<f64>,
    adjoint_double_layer: Mat<f64>,
    arclength: ArcLengthMap,
    trace_to_density: Mat<f64>,
    constant_row: Vec<f64>,
    energy: Mat<f64>,
    energy_asymmetry: f64,
}

/// Kress weights `R_k`, `k = 0..2n−1`, for `∫ log(4 sin²((t_i−τ)/2)) f(τ) dτ`.
fn kress_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..2 * n)
        .map(|k| {
            let mut sum = 0.0;
            for m in 1..n {
                let phase = PI * ((m * k) % (2 * n)) as f64 / nf;
                sum += phase.cos() / m as f64;
            }
            let alt = if k % 2 == 0 { 1.0 } else { -1.0 };
            -2.0 * PI / nf * sum - PI / (nf * nf) * alt
        })
        .collect()
}

pub fn assemble(curve: &BoundaryCurve, n: usize) -> Result<OperatorSet> {
    check_node_count(n)?;
    curve.validate()?;
    let nodes = Nodes::sample(curve, n)?;
    let half = n / 2;
    let h = PI / half as f64;
    let r = kress_weights(half);
    let inv4pi = 0.25 / PI;

    let single_layer = Mat::from_fn(n, n, |i, j| {
        let log_part = r[i.abs_diff(j)] * inv4pi;
        let smooth = if i == j {
            nodes.speeds[i].powi(2).ln()
        } else {
            let r2 = (nodes.points[i] - nodes.points[j]).norm_squared();
            let s = (0.5 * (nodes.params[i] - nodes.params[j])).sin();
            (r2 / (4.0 * s * s)).ln()
        };
        (log_part + h * inv4pi * smooth) * nodes.speeds[j]
    });

    let mut diag = Vec::with_capacity(n);
    for &t in &nodes.params {
        diag.push(curvature(curve, t)? * inv4pi);
    }
    let adjoint_double_layer = Mat::from_fn(n, n, |i, j| {
        let k = if i == j {
            diag[i]
        } else {
            gamma0_dnu_unchecked(nodes.points[i], nodes.normals[i], nodes.points[j])
        };
        h * nodes.speeds[j] * k
    });

    OperatorSet::build(curve.clone(), nodes, single_layer, adjoint_double_layer)
}

fn check_node_count(n: usize) -> Result<()> {
    if n < 16 || n % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "node count must be even and at least 16, got {n}"
        )));
    }
    Ok(())
}

impl OperatorSet {
    /// Builds an operator set from externally supplied matrices on the
    /// standard nodes of `curve`. Used for fixtures that perturb the kernels.
    pub fn from_matrices(
        curve: &BoundaryCurve,
        single_layer: Mat<f64>,
        adjoint_double_layer: Mat<f64>,
    ) -> Result<Self> {
        let n = single_layer.nrows();
        check_node_count(n)?;
        if single_layer.ncols() != n
            || adjoint_double_layer.nrows() != n
            || adjoint_double_layer.ncols() != n
        {
            return Err(Error::InvalidInput("operator shapes do not match".into()));
        }
        let nodes = Nodes::sample(curve, n)?;
        Self::build(curve.clone(), nodes, single_layer, adjoint_double_layer)
    }

    fn build(
        curve: BoundaryCurve,
        nodes: Nodes,
        single_layer: Mat<f64>,
        adjoint_double_layer: Mat<f64>,
    ) -> Result<Self> {
        let n = nodes.len();
        let h = TWO_PI / n as f64;
        let weights: Vec<f64> = nodes.speeds.iter().map(|s| h * s).collect();
        let arclength = ArcLengthMap::new(&curve)?;

        // [S 1; wᵀ 0] [Φ; c] = [I; 0]
        let augmented = Mat::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
            (true, true) => single_layer[(i, j)],
            (true, false) => 1.0,
            (false, true) => weights[j],
            (false, false) => 0.0,
        });
        let rhs = Mat::from_fn(n + 1, n, |i, j| if i == j { 1.0 } else { 0.0 });
        let sol = augmented.partial_piv_lu().solve(&rhs);
        if !sol.col_iter().all(|c| c.iter().all(|v| v.is_finite())) {
            return Err(Error::LinearSolve(
                "single-layer system is singular on this curve".into(),
            ));
        }
        let trace_to_density = Mat::from_fn(n, n, |i, j| sol[(i, j)]);
        let constant_row: Vec<f64> = (0..n).map(|j| sol[(n, j)]).collect();

        let mut dtn = &adjoint_double_layer * &trace_to_density;
        for i in 0..n {
            for j in 0..n {
                dtn[(i, j)] -= 0.5 * trace_to_density[(i, j)];
            }
        }
        let mut asym = 0.0_f64;
        let mut scale = 0.0_f64;
        let energy = Mat::from_fn(n, n, |i, j| {
            let a = weights[i] * dtn[(i, j)];
            let b = weights[j] * dtn[(j, i)];
            asym = asym.max((a - b).abs());
            scale = scale.max(a.abs());
            0.5 * (a + b)
        });

        Ok(Self {
            curve,
            nodes,
            weights,
            single_layer,
            adjoint_double_layer,
            arclength,
            trace_to_density,
            constant_row,
            energy,
            energy_asymmetry: asym / scale.max(f64::MIN_POSITIVE),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn nodes(&self) -> &Nodes {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn single_layer(&self) -> &Mat<f64> {
        &self.single_layer
    }

    pub fn adjoint_double_layer(&self) -> &Mat<f64> {
        &self.adjoint_double_layer
    }

    pub fn arclength(&self) -> &ArcLengthMap {
        &self.arclength
    }

    /// Maps boundary values `f` to the density `φ` with `S φ + c = f`.
    pub fn trace_to_density(&self) -> &Mat<f64> {
        &self.trace_to_density
    }

    /// Row giving the constant `c` of the representation from boundary values.
    pub fn constant_row(&self) -> &[f64] {
        &self.constant_row
    }

    /// Symmetric Dirichlet energy matrix: `fᵀ E g ≈ ∫ ∂_ν u_f u_g`.
    pub fn energy(&self) -> &Mat<f64> {
        &self.energy
    }

    /// Relative size of the antisymmetric part removed from the energy matrix.
    pub fn energy_asymmetry(&self) -> f64 {
        self.energy_asymmetry
    }

    /// Parameter spacing of the nodes.
    pub fn spacing(&self) -> f64 {
        TWO_PI / self.len() as f64
    }

    pub fn perimeter(&self) -> f64 {
        self.arclength.perimeter()
    }

    /// Density and constant representing boundary values `f`.
    pub fn represent(&self, values: &[f64]) -> (Vec<f64>, f64) {
        let n = self.len();
        let density = (0..n)
            .map(|i| (0..n).map(|j| self.trace_to_density[(i, j)] * values[j]).sum())
            .collect();
        let constant = self.constant_row.iter().zip(values).map(|(a, b)| a * b).sum();
        (density, constant)
    }

    /// `S φ + c` at the nodes.
    pub fn boundary_trace(&self, density: &[f64], constant: f64) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                constant + (0..n).map(|j| self.single_layer[(i, j)] * density[j]).sum::<f64>()
            })
            .collect()
    }

    /// Nearest node to a point and its distance.
    pub fn nearest_node(&self, y: Vec2) -> (usize, f64) {
        self.nodes
            .points
            .iter()
            .enumerate()
            .map(|(j, p)| (j, p.distance(y)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    fn upsampling_for(&self, y: Vec2) -> (usize, usize, f64) {
        let (j, d) = self.nearest_node(y);
        let h = self.weights[j];
        let factor = if d >= 4.0 * h {
            1
        } else {
            ((5.0 * h / d.max(1e-300)).ceil() as usize).clamp(1, MAX_UPSAMPLING)
        };
        (factor, j, d)
    }

    fn refined(&self, factor: usize) -> Result<(Vec<Vec2>, Vec<Vec2>, Vec<f64>)> {
        if factor == 1 {
            return Ok((
                self.nodes.points.clone(),
                self.nodes.normals.clone(),
                self.weights.clone(),
            ));
        }
        let m = factor * self.len();
        let h = TWO_PI / m as f64;
        let mut pts = Vec::with_capacity(m);
        let mut nus = Vec::with_capacity(m);
        let mut ws = Vec::with_capacity(m);
        for k in 0..m {
            let bp = point_normal_speed(&self.curve, k as f64 * h)?;
            pts.push(bp.point);
            nus.push(bp.normal);
            ws.push(h * bp.speed);
        }
        Ok((pts, nus, ws))
    }

    /// Whether `y` lies inside the curve, from the Gauss flux of `y`.
    pub fn contains(&self, y: Vec2) -> Result<bool> {
        let (factor, _, d) = self.upsampling_for(y);
        if d == 0.0 {
            return Ok(false);
        }
        let (pts, nus, ws) = self.refined(factor)?;
        let flux: f64 = (0..pts.len())
            .map(|k| gamma0_dnu_unchecked(pts[k], nus[k], y) * ws[k])
            .sum();
        Ok(flux > 0.5)
    }

    /// Evaluates `S[φ](y) + c` at an interior point.
    pub fn eval_layer_potential(&self, density: &[f64], constant: f64, y: Vec2) -> Result<Evaluation> {
        let (factor, _, d) = self.upsampling_for(y);
        if d == 0.0 {
            return Err(Error::Singularity(format!("{y:?} coincides with a node")));
        }
        let (pts, nus, ws) = self.refined(factor)?;
        let flux: f64 = (0..pts.len())
            .map(|k| gamma0_dnu_unchecked(pts[k], nus[k], y) * ws[k])
            .sum();
        if flux < 0.5 {
            return Err(Error::InvalidInput(format!("{y:?} is not inside the domain")));
        }
        let fine = upsample_periodic(density, factor);
        let value = constant
            + (0..pts.len())
                .map(|k| gamma0_from_r2((pts[k] - y).norm_squared()) * ws[k] * fine[k])
                .sum::<f64>();
        // trapezoidal error for the log kernel decays like exp(-2π d / h)
        let fine_h = self.weights.iter().cloned().fold(0.0, f64::max) / factor as f64;
        let accuracy = if d < 0.25 * fine_h {
            Accuracy::NearBoundary
        } else {
            Accuracy::Resolved
        };
        Ok(Evaluation {
            value,
            accuracy,
            upsampling: factor,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accuracy {
    Resolved,
    /// Closer to the boundary than the finest available quadrature resolves.
    NearBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub accuracy: Accuracy,
    pub upsampling: usize,
}

/// Trigonometric interpolation of equispaced periodic samples onto a grid
/// `factor` times finer.
pub fn upsample_periodic(values: &[f64], factor: usize) -> Vec<f64> {
    let n = values.len();
    if factor <= 1 || n == 0 {
        return values.to_vec();
    }
    let m = n * factor;
    let mut planner = FftPlanner::<f64>::new();
    let mut spec: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut fine = vec![Complex::new(0.0, 0.0); m];
    let half = n / 2;
    for k in 0..half {
        fine[k] = spec[k];
    }
    for k in (half + 1)..n {
        fine[m - n + k] = spec[k];
    }
    if n % 2 == 0 {
        fine[half] = spec[half] * 0.5;
        fine[m - half] = spec[half] * 0.5;
    } else {
        fine[half] = spec[half];
    }
    planner.plan_fft_inverse(m).process(&mut fine);
    fine.iter().map(|c| c.re / n as f64).collect()
}

/// Per-node boundary labels and Steklov fractions induced by a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMask {
    partition: BoundaryPartition,
    labels: Vec<Label>,
    fractions: Vec<f64>,
    steklov_weights: Vec<f64>,
}

impl PartitionMask {
    pub fn partition(&self) -> &BoundaryPartition {
        &self.partition
    }

    /// Label of the arc containing each node parameter.
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Arclength fraction of each node's quadrature cell that is Steklov.
    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    /// Quadrature weights of the Steklov part.
    pub fn steklov_weights(&self) -> &[f64] {
        &self.steklov_weights
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }

    pub fn steklov_length(&self) -> f64 {
        self.steklov_weights.iter().sum()
    }
}

pub fn mask_from_partition(ops: &OperatorSet, partition: &BoundaryPartition) -> Result<PartitionMask> {
    let n = ops.len();
    let map = ops.arclength();
    let half_cell = 0.5 * ops.spacing();
    let plain = partition.is_all_steklov();
    let mut labels = Vec::with_capacity(n);
    let mut fractions = Vec::with_capacity(n);
    for &t in &ops.nodes().params {
        labels.push(partition.label_at(t));
        let s = if plain {
            1.0
        } else {
            let (a, b) = (t - half_cell, t + half_cell);
            let cell = map.arclength_at(b) - map.arclength_at(a);
            (partition.measure_in(map, Label::Steklov, a, b) / cell).clamp(0.0, 1.0)
        };
        fractions.push(s);
    }
    if !labels.contains(&Label::Steklov) {
        return Err(Error::Mask("partition leaves no Steklov node".into()));
    }
    let steklov_weights = ops.weights().iter().zip(&fractions).map(|(w, s)| w * s).collect();
    Ok(PartitionMask {
        partition: partition.clone(),
        labels,
        fractions,
        steklov_weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Whole,
    Steklov,
    Neumann,
}

/// Quadrature of `∫ f g dσ` over a labeled part of the boundary.
pub fn l2_inner_product(ops: &OperatorSet, mask: &PartitionMask, region: Region, f: &[f64], g: &[f64]) -> f64 {
    assert_eq!(f.len(), ops.len());
    assert_eq!(g.len(), ops.len());
    let w = ops.weights();
    let s = mask.fractions();
    (0..ops.len())
        .map(|j| {
            let weight = match region {
                Region::Whole => w[j],
                Region::Steklov => w[j] * s[j],
                Region::Neumann => w[j] * (1.0 - s[j]),
            };
            weight * f[j] * g[j]
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ArcSpec;
    use proptest::prelude::*;

    fn apply(m: &Mat<f64>, v: &[f64]) -> Vec<f64> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
            .collect()
    }

    #[test]
    fn node_count_is_validated() {
        let c = BoundaryCurve::unit_circle();
        assert!(assemble(&c, 15).is_err());
        assert!(assemble(&c, 14).is_err());
        assert!(assemble(&c, 16).is_ok());
    }

    #[test]
    fn circle_single_layer_diagonalizes_cosines() {
        let n = 64;
        let ops = assemble(&BoundaryCurve::unit_circle(), n).unwrap();
        for m in 1..=n / 4 {
            let f: Vec<f64> = ops.nodes().params.iter().map(|t| (m as f64 * t).cos()).collect();
            let sf = apply(ops.single_layer(), &f);
            for (a, b) in sf.iter().zip(&f) {
                assert!((a + b / (2.0 * m as f64)).abs() < 1e-10, "m={m}");
            }
        }
    }

    #[test]
    fn circle_constants() {
        let ops = assemble(&BoundaryCurve::unit_circle(), 64).unwrap();
        let one = vec![1.0; 64];
        for v in apply(ops.single_layer(), &one) {
            assert!(v.abs() < 1e-12);
        }
        for v in apply(ops.adjoint_double_layer(), &one) {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    /// `S[1/(a − cos θ)]` on the unit circle, summed in closed form from the
    /// Fourier expansion.
    fn poisson_oracle(a: f64, theta: f64) -> f64 {
        let root = (a * a - 1.0).sqrt();
        let rho = a - root;
        (1.0 - 2.0 * rho * theta.cos() + rho * rho).ln() / (2.0 * root)
    }

    #[test]
    fn single_layer_converges_spectrally() {
        let a = 1.05;
        let errors: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let ops = assemble(&BoundaryCurve::unit_circle(), n).unwrap();
                let f: Vec<f64> = ops.nodes().params.iter().map(|t| 1.0 / (a - t.cos())).collect();
                let sf = apply(ops.single_layer(), &f);
                ops.nodes()
                    .params
                    .iter()
                    .zip(sf)
                    .map(|(t, v)| (v - poisson_oracle(a, *t)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errors[0] / errors[1] > 1e2, "{errors:?}");
        assert!(errors[1] / errors[2] > 1e2, "{errors:?}");
    }

    #[test]
    fn weights_sum_to_perimeter() {
        for c in [BoundaryCurve::Kite, BoundaryCurve::ellipse(2.0, 0.5).unwrap()] {
            let ops = assemble(&c, 128).unwrap();
            assert!(ops.weights().iter().all(|w| *w > 0.0));
            let sum: f64 = ops.weights().iter().sum();
            assert!((sum - ops.perimeter()).abs() < 1e-10 * ops.perimeter());
        }
    }

    #[test]
    fn weighted_single_layer_is_symmetric() {
        let ops = assemble(&BoundaryCurve::Kite, 128).unwrap();
        let s = ops.single_layer();
        let w = ops.weights();
        for i in 0..128 {
            for j in 0..i {
                let d = w[i] * s[(i, j)] - w[j] * s[(j, i)];
                assert!(d.abs() < 1e-10);
            }
        }
    }

    /// On a general curve it is the weighted column sums of K* that equal ½,
    /// by the Gauss identity at boundary points.
    #[test]
    fn adjoint_double_layer_weighted_columns_sum_to_half() {
        let ops = assemble(&BoundaryCurve::Kite, 256).unwrap();
        let k = ops.adjoint_double_layer();
        let w = ops.weights();
        for j in 0..256 {
            let col: f64 = (0..256).map(|i| w[i] * k[(i, j)]).sum();
            assert!((col - 0.5 * w[j]).abs() < 1e-8 * w[j], "column {j}");
        }
    }

    #[test]
    fn representation_reproduces_traces() {
        let ops = assemble(&BoundaryCurve::Kite, 96).unwrap();
        let f: Vec<f64> = ops.nodes().params.iter().map(|t| 2.0 + (3.0 * t).sin()).collect();
        let (phi, c) = ops.represent(&f);
        let back = ops.boundary_trace(&phi, c);
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).abs() < 1e-10);
        }
        let total: f64 = phi.iter().zip(ops.weights()).map(|(p, w)| p * w).sum();
        assert!(total.abs() < 1e-10);
    }

    #[test]
    fn energy_of_harmonic_polynomial() {
        // u = x on the ellipse: ∫ ∂_ν u u = area
        let (a, b) = (1.6, 0.8);
        let ops = assemble(&BoundaryCurve::ellipse(a, b).unwrap(), 128).unwrap();
        let f: Vec<f64> = ops.nodes().points.iter().map(|p| p.x).collect();
        let ef = apply(ops.energy(), &f);
        let e: f64 = ef.iter().zip(&f).map(|(x, y)| x * y).sum();
        assert!((e - PI * a * b).abs() < 1e-9, "{e}");
        let one = vec![1.0; 128];
        assert!(apply(ops.energy(), &one).iter().all(|v| v.abs() < 1e-10));
        assert!(ops.energy_asymmetry() < 1e-8);
    }

    #[test]
    fn masks() {
        let ops = assemble(&BoundaryCurve::unit_circle(), 64).unwrap();
        let all = mask_from_partition(&ops, &BoundaryPartition::all_steklov()).unwrap();
        assert_eq!(all.count(Label::Steklov), 64);

        let half = BoundaryPartition::from_neumann_arcs(&[(0.0, PI)]).unwrap();
        let m = mask_from_partition(&ops, &half).unwrap();
        assert!((m.count(Label::Neumann) as i64 - 32).abs() <= 1);

        let (marked, _) = BoundaryPartition::all_steklov()
            .insert_neumann_arc(ops.arclength(), ArcSpec { center: 1.0, half_length: 0.0 })
            .unwrap();
        let m = mask_from_partition(&ops, &marked).unwrap();
        assert_eq!(m.count(Label::Neumann), 0);
        assert!(m.fractions().iter().all(|s| *s == 1.0));

        let none = BoundaryPartition::from_neumann_arcs(&[(0.0, TWO_PI)]).unwrap();
        assert!(matches!(mask_from_partition(&ops, &none), Err(Error::Mask(_))));
    }

    #[test]
    fn inner_products_on_circle() {
        let ops = assemble(&BoundaryCurve::unit_circle(), 64).unwrap();
        let mask = mask_from_partition(&ops, &BoundaryPartition::all_steklov()).unwrap();
        let one = vec![1.0; 64];
        let c: Vec<f64> = ops.nodes().params.iter().map(|t| t.cos()).collect();
        let s: Vec<f64> = ops.nodes().params.iter().map(|t| t.sin()).collect();
        assert!((l2_inner_product(&ops, &mask, Region::Steklov, &one, &one) - TWO_PI).abs() < 1e-12);
        assert!(l2_inner_product(&ops, &mask, Region::Whole, &c, &s).abs() < 1e-12);
        assert!((l2_inner_product(&ops, &mask, Region::Whole, &c, &c) - PI).abs() < 1e-12);
        assert!(l2_inner_product(&ops, &mask, Region::Neumann, &c, &c).abs() < 1e-12);
    }

    #[test]
    fn upsampling_is_exact_for_trigonometric_polynomials() {
        let n = 32;
        let f = |t: f64| 1.0 + (3.0 * t).cos() - 0.5 * (7.0 * t).sin();
        let v: Vec<f64> = (0..n).map(|j| f(j as f64 * TWO_PI / n as f64)).collect();
        let fine = upsample_periodic(&v, 5);
        for (k, x) in fine.iter().enumerate() {
            let t = k as f64 * TWO_PI / (5 * n) as f64;
            assert!((x - f(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn layer_potential_of_harmonic_function() {
        // u = x² − y² + 0.3: interior evaluation from its boundary values
        let ops = assemble(&BoundaryCurve::Kite, 192).unwrap();
        let f: Vec<f64> = ops.nodes().points.iter().map(|p| p.x * p.x - p.y * p.y + 0.3).collect();
        let (phi, c) = ops.represent(&f);
        for y in [Vec2::new(0.0, 0.0), Vec2::new(-0.5, 0.7), Vec2::new(-0.3, -1.0)] {
            let e = ops.eval_layer_potential(&phi, c, y).unwrap();
            assert!((e.value - (y.x * y.x - y.y * y.y + 0.3)).abs() < 1e-9, "{y:?}");
        }
        // approach a boundary point along the normal
        let j = 40;
        let x = ops.nodes().points[j];
        let nu = ops.nodes().normals[j];
        for d in [1e-2, 1e-3] {
            let y = x - nu * d;
            let e = ops.eval_layer_potential(&phi, c, y).unwrap();
            assert!(e.upsampling > 1);
            assert!((e.value - (y.x * y.x - y.y * y.y + 0.3)).abs() < 1e-6, "d={d}");
        }
        assert!(ops.eval_layer_potential(&phi, c, Vec2::new(5.0, 0.0)).is_err());
        assert!(ops.contains(Vec2::new(0.0, 0.0)).unwrap());
        assert!(!ops.contains(Vec2::new(1.2, 0.0)).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn steklov_weights_measure_the_steklov_part(
            center in 0.0..TWO_PI,
            eps in 0.0..1.5f64,
        ) {
            let ops = assemble(&BoundaryCurve::Kite, 64).unwrap();
            let (p, _) = BoundaryPartition::all_steklov()
                .insert_neumann_arc(ops.arclength(), ArcSpec { center, half_length: eps })
                .unwrap();
            let mask = mask_from_partition(&ops, &p).unwrap();
            let exact = p.total_length(ops.arclength(), Label::Steklov);
            // cell fractions integrate the indicator to within one cell per endpoint
            let hmax = ops.weights().iter().cloned().fold(0.0, f64::max);
            prop_assert!((mask.steklov_length() - exact).abs() < 2.0 * hmax);
            for (label, s) in mask.labels().iter().zip(mask.fractions()) {
                if *s == 0.0 { prop_assert_eq!(*label, Label::Neumann); }
                if *s == 1.0 && eps > 0.0 { prop_assert_eq!(*label, Label::Steklov); }
            }
        }
    }
}
