//! Text checkpoints: run metadata plus every parameter at 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use pinn_core::{ModelKind, NetSpec, PdeProblem, PredictorModel, ProblemKind};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub preset: String,
    pub repeat: usize,
    pub init_seed: u64,
    pub sampling_seed: u64,
    pub epochs: usize,
    pub problem: ProblemKind,
    pub model: ModelKind,
    pub q_blend: f64,
    pub net: NetSpec,
    #[serde(skip)]
    pub params: Vec<f64>,
}

#[derive(Deserialize)]
struct Document {
    #[serde(flatten)]
    meta: Checkpoint,
    weights: Weights,
}

#[derive(Deserialize)]
struct Weights {
    values: Vec<f64>,
}

fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Checkpoint {
    pub fn to_text(&self) -> Result<String> {
        let mut s = toml::to_string(self).map_err(|e| BenchError::Config(e.to_string()))?;
        s.push_str("\n[weights]\nvalues = [\n");
        for v in &self.params {
            let _ = writeln!(s, "  {},", float(*v));
        }
        s.push_str("]\n");
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<Checkpoint> {
        let doc: Document = toml::from_str(text).map_err(|e| BenchError::Config(format!("bad checkpoint: {e}")))?;
        let mut c = doc.meta;
        c.params = doc.weights.values;
        if c.params.len() != c.net.param_count() {
            return Err(BenchError::Config(format!(
                "checkpoint holds {} parameters, its net needs {}",
                c.params.len(),
                c.net.param_count()
            )));
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()?).map_err(|e| BenchError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Checkpoint::from_text(&text)
    }

    pub fn predictor(&self) -> Result<PredictorModel> {
        let problem = PdeProblem::new(self.problem)?;
        Ok(PredictorModel::new(self.model, problem, self.net, self.q_blend)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pinn_core::Activation;

    #[test]
    fn round_trip_is_exact() {
        let net = NetSpec::new(2, 1, 3, 2, Activation::Sigmoid).unwrap();
        let params: Vec<f64> = (0..net.param_count()).map(|i| (i as f64 * 0.7).sin() / 3.0).collect();
        let c = Checkpoint {
            preset: "demo".into(),
            repeat: 1,
            init_seed: 11,
            sampling_seed: 12,
            epochs: 3,
            problem: ProblemKind::Kdv { solitons: 2, x_range: None, t_range: None },
            model: ModelKind::InitialIncluded,
            q_blend: 1e-9,
            net,
            params,
        };
        let back = Checkpoint::from_text(&c.to_text().unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(back.predictor().is_ok());
    }
}
