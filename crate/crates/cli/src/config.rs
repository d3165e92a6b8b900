//! Run configuration files.
//!
//! Configs are TOML. The first key must be `version = 1`; it names the layout
//! below and is bumped on any incompatible change.
//!
//! ```toml
//! version = 1
//! nodes = 768
//!
//! [curve]
//! kind = "circle"        # circle | ellipse | kite | flower
//! radius = 1.0
//!
//! [partition]            # optional, default all Steklov
//! neumann = [[0.3, 1.2]] # counterclockwise parameter intervals [a, b]
//!
//! [spectrum]
//! count = 9
//!
//! [greens]
//! lambda = 2.5
//! source = [-0.9, 0.0]
//! receiver = [0.0, 0.9]  # optional
//! grid = 41              # lattice points per axis
//!
//! [optimize]
//! source = [-0.9, 0.0]
//! receiver = [0.0, 0.9]
//! lambda_star = 2.5
//! c_tol = 1e-3
//! damping = 0.8
//! step_rule = "damping"  # damping | ratio
//! max_iterations = 200
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use steklov_core::geometry::{BoundaryCurve, BoundaryPartition, Vec2};
use steklov_core::optimizer::{OptimizerConfig, StepRule};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    pub curve: BoundaryCurve,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greens: Option<GreensSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSection>,
}

fn default_nodes() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    #[serde(default)]
    pub neumann: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreensSection {
    pub lambda: f64,
    pub source: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receiver: Option<[f64; 2]>,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_grid() -> usize {
    41
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub source: [f64; 2],
    pub receiver: [f64; 2],
    pub lambda_star: f64,
    #[serde(default = "default_c_tol")]
    pub c_tol: f64,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default)]
    pub step_rule: StepRule,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_c_tol() -> f64 {
    1e-3
}

fn default_damping() -> f64 {
    0.8
}

fn default_max_iterations() -> usize {
    200
}

fn point(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        let mut numbers: Vec<f64> = Vec::new();
        if let Some(p) = &self.partition {
            numbers.extend(p.neumann.iter().flatten());
        }
        if let Some(g) = &self.greens {
            numbers.push(g.lambda);
            numbers.extend(g.source);
            numbers.extend(g.receiver.into_iter().flatten());
        }
        if let Some(o) = &self.optimize {
            numbers.extend([o.lambda_star, o.c_tol, o.damping]);
            numbers.extend(o.source);
            numbers.extend(o.receiver);
        }
        if numbers.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError("every numeric field must be finite".into()));
        }
        self.curve.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(())
    }

    pub fn partition(&self) -> steklov_core::error::Result<BoundaryPartition> {
        match &self.partition {
            Some(p) if !p.neumann.is_empty() => {
                let arcs: Vec<(f64, f64)> = p.neumann.iter().map(|a| (a[0], a[1])).collect();
                BoundaryPartition::from_neumann_arcs(&arcs)
            }
            _ => Ok(BoundaryPartition::all_steklov()),
        }
    }

    pub fn spectrum_section(&self) -> Result<&SpectrumSection, ConfigError> {
        self.spectrum.as_ref().ok_or_else(|| ConfigError("config has no [spectrum] section".into()))
    }

    pub fn greens_section(&self) -> Result<&GreensSection, ConfigError> {
        self.greens.as_ref().ok_or_else(|| ConfigError("config has no [greens] section".into()))
    }

    pub fn optimizer_config(&self) -> Result<OptimizerConfig, ConfigError> {
        let o = self
            .optimize
            .as_ref()
            .ok_or_else(|| ConfigError("config has no [optimize] section".into()))?;
        Ok(OptimizerConfig {
            curve: self.curve.clone(),
            x_s: point(o.source),
            y: point(o.receiver),
            lambda_star: o.lambda_star,
            c_tol: o.c_tol,
            damping: o.damping,
            step_rule: o.step_rule,
            max_iterations: o.max_iterations,
            nodes: self.nodes,
        })
    }
}

pub fn source_point(p: [f64; 2]) -> Vec2 {
    point(p)
}
