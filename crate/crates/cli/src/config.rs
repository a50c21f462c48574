use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use tetra_core::hopfield::SignConvention;
use tetra_core::{EdgeChoiceTables, SpinConfig, SubfaceCode};

pub const SCHEMA_VERSION: u32 = 1;

/// Reads a JSON config, or returns the defaults when no path is given.
pub fn load<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

/// Parses `a:b:n` into `n` evenly spaced points from `a` to `b` inclusive.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        bail!("grid {spec:?} is not of the form a:b:n");
    };
    let a: f64 = a.trim().parse().with_context(|| format!("grid start {a:?}"))?;
    let b: f64 = b.trim().parse().with_context(|| format!("grid end {b:?}"))?;
    let n: usize = n.trim().parse().with_context(|| format!("grid count {n:?}"))?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        bail!("grid {spec:?} must have finite ends and at least one point");
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

pub fn non_empty(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        bail!("{name} grid is empty");
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        bail!("{name} grid contains {x}");
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TteConfig {
    pub t_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub convention: String,
    /// Search for a passing convention when the configured one fails.
    pub search_on_fail: bool,
    pub tables: Option<EdgeChoiceTables>,
    pub left_diagonals: Option<Vec<Vec<SubfaceCode>>>,
    pub right_diagonals: Option<Vec<Vec<SubfaceCode>>>,
}

impl Default for TteConfig {
    fn default() -> Self {
        Self {
            t_grid: vec![0.0, 0.1, 0.3, 0.7],
            gamma_grid: vec![0.0, 0.2, 0.46888],
            convention: "written-order".into(),
            search_on_fail: true,
            tables: None,
            left_diagonals: None,
            right_diagonals: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceConfig {
    pub side: usize,
    pub steps: usize,
    pub beta_grid: Vec<f64>,
    pub gamma_shift: f64,
    pub tolerance: f64,
    pub initial: Option<SpinConfig>,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        Self { side: 3, steps: 2, beta_grid: vec![0.2, 0.7, 1.5], gamma_shift: 0.0, tolerance: 1e-10, initial: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkKind {
    Triangular,
    Hebbian,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StartState {
    /// First stored pattern (Hebbian) or all up (triangular).
    Pattern,
    Random,
    Explicit(SpinConfig),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub samples: u64,
    /// Cross-checks only run when the network has at most this many neurons.
    pub max_neurons: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, max_neurons: 10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub network: NetworkKind,
    /// Side of the triangular lattice.
    pub side: usize,
    pub weight: f64,
    pub beta: f64,
    pub sign: SignConvention,
    /// Stored patterns; random ones are drawn when absent.
    pub patterns: Option<Vec<SpinConfig>>,
    pub neurons: usize,
    pub pattern_count: usize,
    pub zero_diagonal: bool,
    pub start: StartState,
    pub trajectories: usize,
    pub steps: usize,
    pub seed: Option<u64>,
    pub monte_carlo: Option<MonteCarloConfig>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            network: NetworkKind::Hebbian,
            side: 3,
            weight: 1.0,
            beta: 1.0,
            sign: SignConvention::Sigmoid,
            patterns: None,
            neurons: 16,
            pattern_count: 2,
            zero_diagonal: true,
            start: StartState::Pattern,
            trajectories: 100,
            steps: 10,
            seed: None,
            monte_carlo: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZCheckConfig {
    /// Side of the exhaustively enumerated periodic lattice.
    pub side: usize,
    /// Side of the lattice for the sampled per-configuration identity.
    pub sample_side: usize,
    pub samples: usize,
    pub t_grid: Vec<f64>,
    pub max_period: usize,
    pub seed: Option<u64>,
    pub tables: Option<EdgeChoiceTables>,
}

impl Default for ZCheckConfig {
    fn default() -> Self {
        Self {
            side: 3,
            sample_side: 4,
            samples: 10_000,
            t_grid: vec![0.0, 0.1, 0.3],
            max_period: 4,
            seed: None,
            tables: None,
        }
    }
}
