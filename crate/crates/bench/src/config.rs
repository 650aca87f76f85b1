//! Experiment configuration files.

use std::path::{Path, PathBuf};

use pinn_core::losses::RiskSpec;
use pinn_core::network::solve_width;
use pinn_core::training::{SampleCounts, TestSpec};
use pinn_core::{Activation, Experiment, ModelKind, NetSpec, PdeProblem, ProblemKind, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Net size either as a parameter budget or as explicit depth and width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetSizing {
    pub activation: Activation,
    /// Number of affine maps.
    pub depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    /// Exact parameter count to hit by solving for the width at `depth`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_target: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub problem: ProblemKind,
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_blend: Option<f64>,
    pub risk: RiskSpec,
    pub net: NetSizing,
    pub samples: SampleCounts,
    pub test: TestSpec,
    pub train: TrainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        ExperimentConfig::from_toml(&text)
    }

    /// Name used for output directories and result rows.
    pub fn name(&self) -> String {
        self.preset.clone().unwrap_or_else(|| {
            let p = PdeProblem::new(self.problem).map(|p| p.label()).unwrap_or_default();
            format!("{p}_{}", self.model.label())
        })
    }

    pub fn net_spec(&self) -> Result<NetSpec> {
        let problem = PdeProblem::new(self.problem)?;
        let (p, q) = (problem.input_dim(), problem.components());
        let n = &self.net;
        let width = match (n.width, n.param_target) {
            (Some(w), None) => w,
            (None, Some(target)) => solve_width(p, q, n.depth, target).ok_or_else(|| {
                BenchError::Config(format!(
                    "no width reaches exactly {target} parameters at depth {} for a {p} -> {q} net",
                    n.depth
                ))
            })?,
            (Some(w), Some(target)) => {
                let spec = NetSpec::new(p, q, n.depth, w, n.activation)?;
                if spec.param_count() != target {
                    return Err(BenchError::Config(format!(
                        "width {w} gives {} parameters, not the requested {target}",
                        spec.param_count()
                    )));
                }
                w
            }
            (None, None) => return Err(BenchError::Config("net needs a width or a param_target".into())),
        };
        Ok(NetSpec::new(p, q, n.depth, width, n.activation)?)
    }

    /// The validated core experiment.
    pub fn experiment(&self) -> Result<Experiment> {
        let exp = Experiment {
            problem: self.problem,
            model: self.model,
            q_blend: self.q_blend,
            risk: self.risk,
            net: self.net_spec()?,
            samples: self.samples.clone(),
            test: self.test.clone(),
            train: self.train,
        };
        exp.validate()?;
        Ok(exp)
    }
}
