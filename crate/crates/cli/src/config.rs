//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ddpc_core::io::MatrixJson;
use ddpc_core::linalg::{Matrix, Vector};
use ddpc_core::mpc::Setpoint;
use ddpc_core::presets;
use serde::{Deserialize, Serialize};

/// `"identity"` or an explicit matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weight {
    Named(String),
    Matrix(MatrixJson),
}

impl Default for Weight {
    fn default() -> Self {
        Weight::Named("identity".into())
    }
}

impl Weight {
    pub fn resolve(&self, dim: usize) -> Result<Matrix> {
        match self {
            Weight::Named(name) if name == "identity" => Ok(Matrix::identity(dim, dim)),
            Weight::Named(name) => bail!("unknown weight `{name}` (expected \"identity\" or a matrix)"),
            Weight::Matrix(m) => Ok(Matrix::try_from(m.clone())?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetpointEntry {
    pub start: i64,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
}

impl From<&SetpointEntry> for Setpoint {
    fn from(e: &SetpointEntry) -> Self {
        Setpoint {
            start: e.start,
            u: Vector::from_vec(e.u.clone()),
            y: Vector::from_vec(e.y.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// System file; the built-in four-state example when absent.
    pub system: Option<PathBuf>,
    pub horizon: usize,
    pub data_length: usize,
    /// Excitation order; `L + 2(q + s − 1)` (or `L + 2n`) when absent.
    pub pe_order: Option<usize>,
    /// Recorded data CSV; collected from the simulator when absent.
    pub data: Option<PathBuf>,
    pub q_weight: Weight,
    pub r_weight: Weight,
    pub setpoints: Vec<SetpointEntry>,
    pub seed: u64,
    pub priming_steps: usize,
    pub total_steps: usize,
    /// Slow initial state; zero when absent.
    pub initial_slow: Option<Vec<f64>>,
    /// Use the state dimension instead of the structural indices.
    pub conservative: bool,
    pub settle_tol: f64,
    pub rank_tol: f64,
    pub reconstruct_states: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            system: None,
            horizon: presets::HORIZON,
            data_length: presets::DATA_LENGTH,
            pe_order: None,
            data: None,
            q_weight: Weight::default(),
            r_weight: Weight::default(),
            setpoints: presets::example_setpoints()
                .into_iter()
                .map(|(start, u, y)| SetpointEntry {
                    start,
                    u: u.iter().copied().collect(),
                    y: y.iter().copied().collect(),
                })
                .collect(),
            seed: 0,
            priming_steps: presets::PRIMING_STEPS,
            total_steps: presets::TOTAL_STEPS,
            initial_slow: None,
            conservative: false,
            settle_tol: 1e-3,
            rank_tol: ddpc_core::linalg::RANK_TOL,
            reconstruct_states: true,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.system, &mut cfg.data, &mut cfg.output_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            bail!("horizon must be positive");
        }
        if self.data_length == 0 || self.total_steps == 0 {
            bail!("data_length and total_steps must be positive");
        }
        if !(self.settle_tol > 0.0 && self.rank_tol > 0.0) {
            bail!("tolerances must be positive");
        }
        if self.pe_order == Some(0) {
            bail!("pe_order must be positive");
        }
        for f in [&self.system, &self.data].into_iter().flatten() {
            if !f.exists() {
                bail!("referenced file {} does not exist", f.display());
            }
        }
        Ok(())
    }
}
