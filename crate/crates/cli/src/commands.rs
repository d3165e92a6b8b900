use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use steklov_core::discretization::{assemble, mask_from_partition, OperatorSet};
use steklov_core::eigensolver::{solve_spectrum, SpectrumRequest};
use steklov_core::error::Error;
use steklov_core::geometry::{Curve, Label, Vec2};
use steklov_core::greens::{eval_greens, solve_greens};
use steklov_core::optimizer::{run_on, OptimizerTrace, TrialRecord};
use steklov_core::validation::{run_suite, ValidationReport};

use crate::config::{source_point, ConfigError, RunConfig};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(Error),
    NotConverged(String),
    Checks,
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Numerical(e) => match e {
                Error::Geometry(_)
                | Error::Partition(_)
                | Error::Mask(_)
                | Error::InvalidInput(_)
                | Error::Usage(_)
                | Error::Requirement(_) => EXIT_CONFIG,
                Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
                _ => EXIT_NUMERICAL,
            },
            Failure::NotConverged(_) => EXIT_NOT_CONVERGED,
            Failure::Checks => EXIT_NUMERICAL,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Config(m) => format!("error[config]: {m}"),
            Failure::Numerical(e) => format!("error[{}]: {e}", e.kind()),
            Failure::NotConverged(m) => format!("error[not-converged]: {m}"),
            Failure::Checks => "error[validation]: one or more checks failed".into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(format!("output: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn prepare_out(out: &Path) -> Outcome {
    fs::create_dir_all(out)?;
    Ok(())
}

/// Writes the config actually used, after command-line overrides.
fn record_config(cfg: &RunConfig, out: &Path) -> Outcome {
    prepare_out(out)?;
    fs::write(out.join("resolved.toml"), cfg.to_toml())?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn operators(cfg: &RunConfig) -> Result<OperatorSet, Failure> {
    Ok(assemble(&cfg.curve, cfg.nodes)?)
}

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    eigenvalue: f64,
    multiplicity_cluster: usize,
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &Path) -> Outcome {
    let count = cfg.spectrum_section()?.count;
    let ops = operators(cfg)?;
    let mask = mask_from_partition(&ops, &cfg.partition()?)?;
    let spectrum = solve_spectrum(&ops, &mask, &SpectrumRequest::new(count))?;
    record_config(cfg, out)?;
    let mut w = csv::Writer::from_path(out.join("spectrum.csv"))?;
    for (index, p) in spectrum.pairs.iter().enumerate() {
        w.serialize(SpectrumRow {
            index,
            eigenvalue: p.value,
            multiplicity_cluster: p.cluster_id,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BoundaryRow {
    node: usize,
    t_over_pi: f64,
    x: f64,
    y: f64,
    value: f64,
    label: Label,
}

#[derive(Serialize)]
struct GreensSummary {
    lambda: f64,
    source: Vec2,
    nearest_eigenvalue: f64,
    condition_estimate: f64,
    residual: f64,
    receiver: Option<Vec2>,
    value_at_receiver: Option<f64>,
}

pub fn cmd_greens(cfg: &RunConfig, out: &Path) -> Outcome {
    let g = cfg.greens_section()?;
    if g.grid < 2 {
        return Err(Failure::Config("greens.grid must be at least 2".into()));
    }
    let ops = operators(cfg)?;
    let mask = mask_from_partition(&ops, &cfg.partition()?)?;
    let source = source_point(g.source);
    let field = solve_greens(&ops, &mask, source, g.lambda)?;
    let receiver = g.receiver.map(source_point);
    let value_at_receiver = match receiver {
        Some(y) => Some(eval_greens(&field, &ops, y)?.value),
        None => None,
    };
    record_config(cfg, out)?;

    let mut w = csv::Writer::from_path(out.join("greens_boundary.csv"))?;
    let nodes = ops.nodes();
    for j in 0..ops.len() {
        let p = nodes.points[j];
        w.serialize(BoundaryRow {
            node: j,
            t_over_pi: nodes.params[j] / PI,
            x: p.x,
            y: p.y,
            value: field.boundary_values[j],
            label: mask.labels()[j],
        })?;
    }
    w.flush()?;

    // bounding box from the nodes
    let (mut lo, mut hi) = (nodes.points[0], nodes.points[0]);
    for p in &nodes.points {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let n = g.grid;
    let mut grid = std::io::BufWriter::new(fs::File::create(out.join("greens_grid.dat"))?);
    writeln!(grid, "# x y value")?;
    for i in 0..n {
        let x = lo.x + (hi.x - lo.x) * i as f64 / (n - 1) as f64;
        let mut any = false;
        for j in 0..n {
            let y = lo.y + (hi.y - lo.y) * j as f64 / (n - 1) as f64;
            let p = Vec2::new(x, y);
            if p.distance(source) < 1e-12 || !ops.contains(p)? || ops.nearest_node(p).1 < 1e-12 {
                continue;
            }
            let v = eval_greens(&field, &ops, p)?.value;
            writeln!(grid, "{x} {y} {v}")?;
            any = true;
        }
        if any {
            writeln!(grid)?;
        }
    }
    grid.flush()?;

    write_json(
        &out.join("greens.json"),
        &GreensSummary {
            lambda: g.lambda,
            source,
            nearest_eigenvalue: field.nearest_eigenvalue,
            condition_estimate: field.condition_estimate,
            residual: field.residual,
            receiver,
            value_at_receiver,
        },
    )
}

#[derive(Serialize)]
struct TraceRow {
    iteration: usize,
    epsilon_delta: f64,
    f: f64,
    lambda: Option<f64>,
    accepted: bool,
    outcome: steklov_core::optimizer::TrialOutcome,
    arc_start_over_pi: f64,
    arc_end_over_pi: f64,
}

impl From<&TrialRecord> for TraceRow {
    fn from(t: &TrialRecord) -> Self {
        Self {
            iteration: t.iteration,
            epsilon_delta: t.epsilon_delta,
            f: t.f,
            lambda: t.lambda,
            accepted: t.accepted(),
            outcome: t.outcome,
            arc_start_over_pi: t.trial_arc.0 / PI,
            arc_end_over_pi: t.trial_arc.1 / PI,
        }
    }
}

#[derive(Serialize)]
struct OptimizeSummary {
    theta_center: f64,
    center_point: Vec2,
    #[serde(rename = "l_N")]
    l_n: f64,
    #[serde(rename = "l_N_over_pi")]
    l_n_over_pi: f64,
    lambda: f64,
    #[serde(rename = "S_Steklov")]
    s_steklov: f64,
    #[serde(rename = "S_End")]
    s_end: Option<f64>,
    ratio: Option<f64>,
    iterations: usize,
    converged: bool,
    base_eigenvalue: f64,
    multiplicity: usize,
    insertion_node: usize,
    reason: Option<String>,
}

fn write_trace(out: &Path, trace: &OptimizerTrace, reason: Option<String>) -> Outcome {
    let mut w = csv::Writer::from_path(out.join("optimize_trace.csv"))?;
    for t in &trace.trials {
        w.serialize(TraceRow::from(t))?;
    }
    w.flush()?;
    let s = trace.summary();
    write_json(
        &out.join("optimize_summary.json"),
        &OptimizeSummary {
            theta_center: s.theta_center,
            center_point: trace.config.curve.point(trace.final_arc.center_parameter),
            l_n: s.l_n,
            l_n_over_pi: s.l_n / PI,
            lambda: s.lambda,
            s_steklov: s.s_steklov,
            s_end: s.s_end,
            ratio: s.ratio,
            iterations: s.iterations,
            converged: s.converged,
            base_eigenvalue: trace.base_eigenvalue,
            multiplicity: trace.multiplicity,
            insertion_node: trace.insertion_node,
            reason,
        },
    )
}

pub fn cmd_optimize(cfg: &RunConfig, out: &Path) -> Outcome {
    let oc = cfg.optimizer_config()?;
    oc.validate()?;
    let ops = operators(cfg)?;
    record_config(cfg, out)?;
    match run_on(&ops, &oc, |_| {}) {
        Ok(trace) => write_trace(out, &trace, None),
        Err(Error::NotConverged { reason, trace }) => {
            write_trace(out, &trace, Some(reason.clone()))?;
            Err(Failure::NotConverged(reason))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_validate(out: Option<&Path>) -> Result<ValidationReport, Failure> {
    let report = run_suite();
    if let Some(out) = out {
        prepare_out(out)?;
        write_json(&out.join("validation.json"), &report)?;
    }
    Ok(report)
}
