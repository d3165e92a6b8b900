//! Resonance tuning: grow one Neumann arc until a Steklov–Neumann eigenvalue
//! reaches the target `λ★`.
//!
//! The arc is seeded as a zero-length marker at the boundary node where the
//! Green's-function product profile is extremal and is widened on both sides
//! by steps predicted from the first-order eigenvalue shift. A trial whose
//! eigenvalue overshoots is undone and retried with a damped step.

use serde::{Deserialize, Serialize};

use crate::asymptotics::eigenfunction_limit_trace;
use crate::discretization::{assemble, l2_inner_product, mask_from_partition, OperatorSet, PartitionMask, Region};
use crate::eigensolver::{orthonormalize_cluster, solve_spectrum, EigenPair, Spectrum, SpectrumRequest};
use crate::error::{Error, Result};
use crate::geometry::{ArcSpec, BoundaryCurve, BoundaryPartition, Curve, Vec2};
use crate::greens::{boundary_product_profile, eval_greens, solve_greens, solve_greens_guarded, GreensField};

/// Denominator `Σ u_i(L)²` below which the step size is undefined.
pub const STAGNATION_FLOOR: f64 = 1e-12;
/// Minimum trace overlap for a continuation to count as the tracked branch.
pub const TRACKING_THRESHOLD: f64 = 0.5;
/// Second-best overlap above this fraction of the best makes tracking ambiguous.
pub const AMBIGUITY_RATIO: f64 = 0.9;

/// How `f` shrinks after an overshoot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// `f ← damping · f`.
    #[default]
    Damping,
    /// `f ← f (λ★ − λ₀) / (λ − λ₀)`.
    Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub curve: BoundaryCurve,
    pub x_s: Vec2,
    pub y: Vec2,
    pub lambda_star: f64,
    pub c_tol: f64,
    pub damping: f64,
    pub step_rule: StepRule,
    pub max_iterations: usize,
    pub nodes: usize,
}

impl OptimizerConfig {
    pub fn new(curve: BoundaryCurve, x_s: Vec2, y: Vec2, lambda_star: f64, nodes: usize) -> Self {
        Self {
            curve,
            x_s,
            y,
            lambda_star,
            c_tol: 1e-3,
            damping: 0.8,
            step_rule: StepRule::Damping,
            max_iterations: 200,
            nodes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_star > 0.0 && self.lambda_star.is_finite()) {
            return Err(Error::InvalidInput(format!("lambda_star must be positive, got {}", self.lambda_star)));
        }
        if !(self.c_tol > 0.0 && self.c_tol.is_finite()) {
            return Err(Error::InvalidInput(format!("c_tol must be positive, got {}", self.c_tol)));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidInput(format!("damping must lie in (0, 1), got {}", self.damping)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be positive".into()));
        }
        if self.x_s.distance(self.y) == 0.0 {
            return Err(Error::InvalidInput("receiver coincides with the source".into()));
        }
        self.curve.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialOutcome {
    Accepted,
    Rejected,
    /// The step did not fit in the remaining Steklov boundary.
    Exhausted,
    Converged,
}

/// One trial step of the growth loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub iteration: usize,
    pub epsilon_delta: f64,
    /// Damping factor used for this step.
    pub f: f64,
    /// Tracked eigenvalue of the trial partition, if it was formed.
    pub lambda: Option<f64>,
    pub overlap: Option<f64>,
    pub outcome: TrialOutcome,
    /// Parameter endpoints of the trial Neumann arc.
    pub trial_arc: (f64, f64),
    /// Parameter endpoints of the committed arc after the step.
    pub committed_arc: (f64, f64),
    pub committed_half_length: f64,
}

impl TrialRecord {
    pub fn accepted(&self) -> bool {
        matches!(self.outcome, TrialOutcome::Accepted | TrialOutcome::Converged)
    }
}

/// Final Neumann arc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcGeometry {
    pub start: f64,
    pub end: f64,
    /// Parameter of the arclength midpoint.
    pub center_parameter: f64,
    pub center_point: Vec2,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizerTrace {
    pub config: OptimizerConfig,
    /// Next lower pure-Steklov eigenvalue and its multiplicity.
    pub base_eigenvalue: f64,
    pub multiplicity: usize,
    pub insertion_node: usize,
    pub insertion_point: Vec2,
    /// `S^{λ★}(x_S, y)` on the pure-Steklov partition.
    pub s_steklov: f64,
    pub trials: Vec<TrialRecord>,
    pub final_partition: BoundaryPartition,
    pub final_lambda: f64,
    pub final_arc: ArcGeometry,
    /// `S^{λ★}(x_S, y)` on the final partition, present on success.
    pub s_end: Option<f64>,
    pub converged: bool,
}

/// One-row digest of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSummary {
    /// Arc centre parameter in multiples of π, in `[0, 2)`.
    pub theta_center: f64,
    pub center_point: Vec2,
    pub l_n: f64,
    pub lambda: f64,
    pub s_steklov: f64,
    pub s_end: Option<f64>,
    pub ratio: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl OptimizerTrace {
    pub fn summary(&self) -> OptimizerSummary {
        OptimizerSummary {
            theta_center: self.final_arc.center_parameter / std::f64::consts::PI,
            center_point: self.final_arc.center_point,
            l_n: self.final_arc.length,
            lambda: self.final_lambda,
            s_steklov: self.s_steklov,
            s_end: self.s_end,
            ratio: self.s_end.map(|e| (e / self.s_steklov).abs()),
            iterations: self.trials.len(),
            converged: self.converged,
        }
    }

    pub fn accepted_lambdas(&self) -> Vec<f64> {
        self.trials.iter().filter(|t| t.accepted()).filter_map(|t| t.lambda).collect()
    }
}

/// Largest pure-Steklov eigenvalue `≤ λ★` together with its whole cluster.
pub fn next_lower_steklov_eigenvalue(ops: &OperatorSet, lambda_star: f64) -> Result<(f64, Vec<EigenPair>)> {
    if !(lambda_star > 0.0) {
        return Err(Error::InvalidInput(format!("lambda_star must be positive, got {lambda_star}")));
    }
    let mask = mask_from_partition(ops, &BoundaryPartition::all_steklov())?;
    let values = crate::eigensolver::spectrum_values(ops, &mask)?;
    let req = SpectrumRequest::new(1);
    let below = values.iter().take_while(|&&v| v <= lambda_star).count();
    if below < 2 {
        return Err(Error::Requirement(format!(
            "lambda_star = {lambda_star} lies below the first nonzero Steklov eigenvalue {}",
            values.get(1).copied().unwrap_or(f64::NAN)
        )));
    }
    let k = below - 1;
    let spectrum = solve_spectrum(ops, &mask, &SpectrumRequest { count: (below + 2).min(values.len()), ..req })?;
    let id = spectrum.pairs[k].cluster_id;
    let cluster: Vec<EigenPair> = spectrum.cluster(id).into_iter().filter(|p| p.value <= lambda_star).collect();
    let lambda = cluster.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    Ok((lambda, cluster))
}

/// Node extremizing `S(x_S, ·) S(y, ·)`: the maximum when `s_xy ≥ 0`, else the
/// minimum. Ties go to the smallest index.
pub fn select_insertion_point(field_x: &GreensField, field_y: &GreensField, s_xy: f64) -> Result<usize> {
    let profile = boundary_product_profile(field_x, field_y)?;
    Ok(extremal_node(&profile, s_xy))
}

fn extremal_node(profile: &[f64], s_xy: f64) -> usize {
    let sign = if s_xy >= 0.0 { 1.0 } else { -1.0 };
    let mut best = 0;
    for (j, v) in profile.iter().enumerate() {
        if sign * v > sign * profile[best] {
            best = j;
        }
    }
    best
}

pub fn run(config: &OptimizerConfig) -> Result<OptimizerTrace> {
    run_with_observer(config, |_| {})
}

pub fn run_with_observer(config: &OptimizerConfig, observer: impl FnMut(&TrialRecord)) -> Result<OptimizerTrace> {
    config.validate()?;
    let ops = assemble(&config.curve, config.nodes)?;
    run_on(&ops, config, observer)
}

/// Runs on an operator set already assembled for `config.curve`;
/// `config.nodes` is ignored.
pub fn run_on(ops: &OperatorSet, config: &OptimizerConfig, mut observer: impl FnMut(&TrialRecord)) -> Result<OptimizerTrace> {
    config.validate()?;
    if ops.curve() != &config.curve {
        return Err(Error::Usage("operator set was assembled for a different curve".into()));
    }
    let lambda_star = config.lambda_star;
    let map = ops.arclength();
    let (lambda0, base_cluster) = next_lower_steklov_eigenvalue(ops, lambda_star)?;

    let steklov = BoundaryPartition::all_steklov();
    let steklov_mask = mask_from_partition(ops, &steklov)?;
    let base_values = crate::eigensolver::spectrum_values(ops, &steklov_mask)?;
    let field_x = solve_greens_guarded(ops, &steklov_mask, &base_values, config.x_s, lambda_star)?;
    let field_y = solve_greens_guarded(ops, &steklov_mask, &base_values, config.y, lambda_star)?;
    let s_steklov = eval_greens(&field_x, ops, config.y)?.value;
    let node = select_insertion_point(&field_x, &field_y, s_steklov)?;
    let center = ops.nodes().params[node];

    let (mut committed, _) = steklov.insert_neumann_arc(map, ArcSpec { center, half_length: 0.0 })?;
    let mut committed_mask = mask_from_partition(ops, &committed)?;
    let mut lambda0 = lambda0;
    let mut cluster = base_cluster.clone();
    let mut half_length = 0.0;
    let mut f = 1.0;
    let mut reference: Option<Vec<f64>> = None;
    let mut trials = Vec::new();

    let mut trace = OptimizerTrace {
        config: config.clone(),
        base_eigenvalue: lambda0,
        multiplicity: base_cluster.len(),
        insertion_node: node,
        insertion_point: ops.nodes().points[node],
        s_steklov,
        trials: Vec::new(),
        final_partition: committed.clone(),
        final_lambda: lambda0,
        final_arc: arc_geometry(ops, &committed),
        s_end: None,
        converged: false,
    };
    let fail = |reason: String, trace: &mut OptimizerTrace, trials: Vec<TrialRecord>, part: &BoundaryPartition, lambda: f64| {
        trace.trials = trials;
        trace.final_partition = part.clone();
        trace.final_lambda = lambda;
        trace.final_arc = arc_geometry(ops, part);
        Error::NotConverged {
            reason,
            trace: Box::new(trace.clone()),
        }
    };

    for iteration in 0..config.max_iterations {
        let basis = orthonormalize_cluster(&cluster, ops, &committed_mask)?;
        let at_l = basis.values_at(node);
        let sum_sq: f64 = at_l.iter().map(|u| u * u).sum();
        if sum_sq < STAGNATION_FLOOR {
            return Err(fail(
                format!("stagnation: the tracked eigenfunctions vanish at the arc centre (Σu² = {sum_sq:e})"),
                &mut trace, trials, &committed, lambda0,
            ));
        }
        let eps_delta = f * 0.5 * (lambda_star - lambda0) / (lambda0 * sum_sq);
        if !(eps_delta > 1e-14 * ops.perimeter()) {
            return Err(fail(
                format!("stagnation: step {eps_delta:e} is too small to change the partition"),
                &mut trace, trials, &committed, lambda0,
            ));
        }
        let reference_trace = match &reference {
            Some(r) => r.clone(),
            None => eigenfunction_limit_trace(&basis, node)?,
        };
        let arc_index = neumann_index(&committed);
        let committed_ends = arc_ends(&committed);

        let mut record = TrialRecord {
            iteration,
            epsilon_delta: eps_delta,
            f,
            lambda: None,
            overlap: None,
            outcome: TrialOutcome::Exhausted,
            trial_arc: committed_ends,
            committed_arc: committed_ends,
            committed_half_length: half_length,
        };
        let trial = committed
            .extend_neumann_arc(map, arc_index, eps_delta)
            .and_then(|p| mask_from_partition(ops, &p).map(|m| (p, m)));
        let (trial_part, trial_mask) = match trial {
            Ok(t) => t,
            Err(Error::Partition(_) | Error::Mask(_)) => {
                f = shrink(config, f, lambda_star, lambda0, None);
                observer(&record);
                trials.push(record);
                continue;
            }
            Err(e) => return Err(e),
        };
        record.trial_arc = arc_ends(&trial_part);

        let spectrum = solve_spectrum(ops, &trial_mask, &SpectrumRequest::new(request_count(&trial_mask, lambda_star)))?;
        let (k, overlap) = match track(ops, &trial_mask, &spectrum, &reference_trace) {
            Ok(t) => t,
            Err(reason) => {
                record.outcome = TrialOutcome::Rejected;
                observer(&record);
                trials.push(record);
                return Err(fail(reason, &mut trace, trials, &committed, lambda0));
            }
        };
        let lambda = spectrum.pairs[k].value;
        record.lambda = Some(lambda);
        record.overlap = Some(overlap);

        if (lambda - lambda_star).abs() <= config.c_tol || lambda < lambda_star - config.c_tol {
            committed = trial_part;
            committed_mask = trial_mask;
            half_length += eps_delta;
            lambda0 = lambda;
            f = 1.0;
            let id = spectrum.pairs[k].cluster_id;
            cluster = spectrum.cluster(id);
            reference = Some(spectrum.pairs[k].trace.clone());
            record.committed_arc = arc_ends(&committed);
            record.committed_half_length = half_length;
            if (lambda - lambda_star).abs() <= config.c_tol {
                record.outcome = TrialOutcome::Converged;
                observer(&record);
                trials.push(record);
                let values = spectrum.all_values().to_vec();
                let field = solve_greens_guarded(ops, &committed_mask, &values, config.x_s, lambda_star)?;
                trace.s_end = Some(eval_greens(&field, ops, config.y)?.value);
                trace.converged = true;
                trace.trials = trials;
                trace.final_partition = committed.clone();
                trace.final_lambda = lambda;
                trace.final_arc = arc_geometry(ops, &committed);
                return Ok(trace);
            }
            record.outcome = TrialOutcome::Accepted;
        } else {
            record.outcome = TrialOutcome::Rejected;
            f = shrink(config, f, lambda_star, lambda0, Some(lambda));
        }
        observer(&record);
        trials.push(record);
    }
    Err(fail(
        format!("no convergence within {} iterations", config.max_iterations),
        &mut trace, trials, &committed, lambda0,
    ))
}

fn shrink(config: &OptimizerConfig, f: f64, lambda_star: f64, lambda0: f64, lambda: Option<f64>) -> f64 {
    match (config.step_rule, lambda) {
        (StepRule::Ratio, Some(l)) if l > lambda0 => f * (lambda_star - lambda0) / (l - lambda0),
        _ => f * config.damping,
    }
}

/// Enough eigenpairs to contain every branch that can sit near `λ★`.
fn request_count(mask: &PartitionMask, lambda_star: f64) -> usize {
    let active = mask.fractions().iter().filter(|&&s| s > crate::discretization::STEKLOV_FRACTION_FLOOR).count();
    let weyl = (lambda_star * mask.steklov_length() / std::f64::consts::PI).ceil() as usize;
    (2 * weyl + 8).min(active)
}

/// Index of the pair whose full-boundary trace best matches `reference`.
fn track(ops: &OperatorSet, mask: &PartitionMask, spectrum: &Spectrum, reference: &[f64]) -> std::result::Result<(usize, f64), String> {
    let ip = |a: &[f64], b: &[f64]| l2_inner_product(ops, mask, Region::Whole, a, b);
    let rn = ip(reference, reference).sqrt();
    let mut scores: Vec<(usize, f64)> = spectrum
        .pairs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, p)| (k, ip(&p.trace, reference).abs() / (rn * ip(&p.trace, &p.trace).sqrt())))
        .collect();
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let Some(&(k, best)) = scores.first() else {
        return Err("tracking lost: no candidate eigenpairs".into());
    };
    if !(best >= TRACKING_THRESHOLD) {
        return Err(format!("tracking lost: best trace overlap {best:.3}"));
    }
    if let Some(&(_, second)) = scores.get(1) {
        if second > AMBIGUITY_RATIO * best {
            return Err(format!("tracking ambiguous: overlaps {best:.3} and {second:.3}"));
        }
    }
    Ok((k, best))
}

fn neumann_index(p: &BoundaryPartition) -> usize {
    p.neumann_arcs().next().map(|a| a.index).expect("partition carries the seeded arc")
}

fn arc_ends(p: &BoundaryPartition) -> (f64, f64) {
    p.neumann_arcs().next().map(|a| (a.start, a.end)).unwrap_or((0.0, 0.0))
}

fn arc_geometry(ops: &OperatorSet, p: &BoundaryPartition) -> ArcGeometry {
    let idx = neumann_index(p);
    let a = p.arc(idx);
    let center_parameter = p.arc_center(ops.arclength(), idx);
    ArcGeometry {
        start: a.start,
        end: a.end,
        center_parameter,
        center_point: ops.curve().point(center_parameter),
        length: p.arc_arclength(ops.arclength(), idx),
    }
}

/// `S^{λ★}(x_S, y)` on a given partition, for reporting.
pub fn greens_value(ops: &OperatorSet, partition: &BoundaryPartition, x_s: Vec2, y: Vec2, lambda: f64) -> Result<f64> {
    let mask = mask_from_partition(ops, partition)?;
    let field = solve_greens(ops, &mask, x_s, lambda)?;
    Ok(eval_greens(&field, ops, y)?.value)
}
