//! Full-batch Adam over fixed collocation sets.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{config, Error, Result};
use crate::losses::{PreparedRisk, RiskSpec, SampleSets};
use crate::models::{default_q_blend, ModelKind, PredictorModel};
use crate::network::{init_params, InitScheme, NetSpec};
use crate::pde::{PdeProblem, ProblemKind};
use crate::sampling::{self, derive_seed, role_seed, FaceCounts, SampleRole, SampleSet};

const INIT_TAG: u64 = 0x1417_5EED;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub init_seed: u64,
    pub sampling_seed: u64,
    pub repeats: usize,
    /// Epochs between fractional-error measurements.
    pub eval_cadence: usize,
    pub init: InitScheme,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            init_seed: 1,
            sampling_seed: 2,
            repeats: 3,
            eval_cadence: 100,
            init: InitScheme::XavierNormal,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(config("learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(config("adam betas must lie in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(config("adam epsilon must be positive"));
        }
        if self.eval_cadence == 0 {
            return Err(config("eval_cadence must be at least 1"));
        }
        if self.repeats == 0 {
            return Err(config("repeats must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> AdamState {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update. Non-finite gradients leave everything
/// untouched.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    if params.len() != grads.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::Shape {
            expected: params.len(),
            found: grads.len(),
        });
    }
    if let Some(index) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { epoch: None, index });
    }
    state.t += 1;
    let c1 = 1.0 - libm::pow(beta1, state.t as f64);
    let c2 = 1.0 - libm::pow(beta2, state.t as f64);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        let mh = state.m[i] / c1;
        let vh = state.v[i] / c2;
        params[i] -= lr * mh / (libm::sqrt(vh) + eps);
    }
    Ok(())
}

/// `Σ‖pred - u‖² / Σ‖u‖²` over the mesh, all components pooled.
pub fn fractional_error(model: &PredictorModel, params: &[f64], mesh: &SampleSet) -> Result<f64> {
    if mesh.is_empty() {
        return Err(config("fractional error needs a non-empty mesh"));
    }
    let pred = model.predict_set(params, mesh)?;
    let comps = model.problem.components();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, x) in mesh.iter().enumerate() {
        let u = model.problem.exact_solution(x)?;
        for c in 0..comps {
            let d = pred[i * comps + c] - u[c];
            num += d * d;
            den += u[c] * u[c];
        }
    }
    if den == 0.0 {
        return Err(Error::UndefinedDenominator);
    }
    Ok(num / den)
}

/// Same metric for arbitrary predictions, e.g. an oracle.
pub fn fractional_error_of(problem: &PdeProblem, mesh: &SampleSet, predict: impl Fn(&[f64]) -> Vec<f64>) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for x in mesh.iter() {
        let u = problem.exact_solution(x)?;
        let p = predict(x);
        for (a, b) in p.iter().zip(&u) {
            num += (a - b) * (a - b);
            den += b * b;
        }
    }
    if den == 0.0 {
        return Err(Error::UndefinedDenominator);
    }
    Ok(num / den)
}

/// Collocation counts per role; roles the risk does not bind are ignored.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleCounts {
    pub bulk: usize,
    #[cfg_attr(feature = "serde", serde(default))]
    pub boundary: Option<FaceCounts>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub initial: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TestSpec {
    /// Tensor grid, one resolution per input axis.
    Grid(Vec<usize>),
    /// Uniform random points, for boxes too large to grid.
    Random { points: usize, seed: u64 },
}

/// Everything one training run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub problem: ProblemKind,
    pub model: ModelKind,
    pub q_blend: Option<f64>,
    pub risk: RiskSpec,
    pub net: NetSpec,
    pub samples: SampleCounts,
    pub test: TestSpec,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub repeat: usize,
    pub init_seed: u64,
    pub bulk_seed: u64,
    pub boundary_seed: Option<u64>,
    pub initial_seed: Option<u64>,
    pub net: NetSpec,
    pub param_count: usize,
    /// Risk before each update; one entry per epoch.
    pub risk_trace: Vec<f64>,
    /// `(epoch, fractional error)` every `eval_cadence` epochs.
    pub error_trace: Vec<(usize, f64)>,
    pub final_risk: f64,
    pub final_fractional_error: f64,
    pub min_fractional_error: f64,
    /// Largest constraint defect seen at evaluation points, for
    /// constraint-included predictors.
    pub max_constraint_defect: Option<f64>,
    pub diverged_at: Option<usize>,
    pub divergence: Option<String>,
    pub initial_params: Vec<f64>,
    pub final_params: Vec<f64>,
    /// Filled in by callers that own a clock.
    pub wall_time_secs: Option<f64>,
}

impl Experiment {
    pub fn build_problem(&self) -> Result<PdeProblem> {
        PdeProblem::new(self.problem)
    }

    pub fn build_model(&self) -> Result<PredictorModel> {
        let problem = self.build_problem()?;
        let q = self.q_blend.unwrap_or_else(|| default_q_blend(&problem));
        PredictorModel::new(self.model, problem, self.net, q)
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        let model = self.build_model()?;
        self.risk.validate(&model)?;
        let has_time = model.problem.has_time();
        if self.samples.bulk == 0 {
            return Err(config("bulk sample count must be at least 1"));
        }
        if self.risk.binds_boundary(has_time) && self.samples.boundary.is_none() {
            return Err(config("risk binds a boundary set but no boundary counts were given"));
        }
        if self.risk.binds_initial(has_time) && self.samples.initial.is_none() {
            return Err(config("risk binds an initial set but no initial count was given"));
        }
        Ok(())
    }

    pub fn test_mesh(&self, problem: &PdeProblem) -> Result<SampleSet> {
        match &self.test {
            TestSpec::Grid(res) => sampling::test_mesh(problem, res),
            TestSpec::Random { points, seed } => sampling::random_test_set(problem, *points, *seed),
        }
    }

    /// Seeds and sample sets of one repeat.
    pub fn sample_sets(&self, problem: &PdeProblem, repeat: usize) -> Result<(SampleSets, [Option<u64>; 3])> {
        let r = repeat as u64;
        let has_time = problem.has_time();
        let base = self.train.sampling_seed;
        let bulk_seed = role_seed(base, SampleRole::Bulk, r);
        let bulk = sampling::sample_bulk(problem, self.samples.bulk, bulk_seed)?;
        let (boundary, bseed) = match (&self.samples.boundary, self.risk.binds_boundary(has_time)) {
            (Some(c), true) => {
                let s = role_seed(base, SampleRole::Boundary, r);
                (Some(sampling::sample_boundary(problem, c, s)?), Some(s))
            }
            _ => (None, None),
        };
        let (initial, iseed) = match (self.samples.initial, self.risk.binds_initial(has_time)) {
            (Some(n), true) => {
                let s = role_seed(base, SampleRole::Initial, r);
                (Some(sampling::sample_initial(problem, n, s)?), Some(s))
            }
            _ => (None, None),
        };
        Ok((
            SampleSets {
                bulk: Some(bulk),
                boundary,
                initial,
            },
            [Some(bulk_seed), bseed, iseed],
        ))
    }

    pub fn init_seed(&self, repeat: usize) -> u64 {
        derive_seed(self.train.init_seed, INIT_TAG, repeat as u64)
    }
}

fn constraint_defect(model: &PredictorModel, params: &[f64], seed: u64) -> Result<Option<f64>> {
    const POINTS: usize = 64;
    if model.kind.is_boundary_included() {
        model.boundary_exactness_check(params, POINTS, seed).map(Some)
    } else if model.kind == ModelKind::InitialIncluded {
        model.initial_exactness_check(params, POINTS, seed).map(Some)
    } else {
        Ok(None)
    }
}

/// One repeat of an experiment.
pub fn train_once(exp: &Experiment, repeat: usize) -> Result<RunRecord> {
    let mesh = exp.test_mesh(&exp.build_problem()?)?;
    train_once_on(exp, repeat, &mesh, |_, _| {})
}

/// As [`train_once`] with a prebuilt test mesh and a per-epoch observer
/// called with `(epoch, risk)`.
pub fn train_once_on(
    exp: &Experiment,
    repeat: usize,
    mesh: &SampleSet,
    mut observe: impl FnMut(usize, f64),
) -> Result<RunRecord> {
    exp.validate()?;
    let model = exp.build_model()?;
    let (sets, seeds) = exp.sample_sets(&model.problem, repeat)?;
    let init_seed = exp.init_seed(repeat);
    let mut params = init_params(&exp.net, exp.train.init, init_seed).into_vec();
    let initial_params = params.clone();
    let risk = PreparedRisk::new(model, exp.risk, &sets)?;
    let model = &risk.model;
    let cfg = &exp.train;
    let mut adam = AdamState::new(params.len());
    let mut risk_trace = Vec::with_capacity(cfg.epochs);
    let mut error_trace = Vec::new();
    let mut max_defect: Option<f64> = None;
    let mut diverged_at = None;
    let mut divergence = None;
    let mut note_defect = |p: &[f64], e: usize| -> Result<()> {
        if let Some(d) = constraint_defect(model, p, derive_seed(init_seed, 0xDEF, e as u64))? {
            max_defect = Some(max_defect.map_or(d, |m: f64| m.max(d)));
        }
        Ok(())
    };

    for epoch in 0..cfg.epochs {
        let step = risk.value_and_grad(&params).and_then(|(r, g)| {
            if r.is_finite() {
                Ok((r, g))
            } else {
                Err(Error::NonFiniteLoss {
                    term: "total",
                    epoch: None,
                    sample: None,
                })
            }
        });
        let (r, g) = match step {
            Ok(v) => v,
            Err(e @ (Error::NonFiniteLoss { .. } | Error::NonFiniteGradient { .. })) => {
                diverged_at = Some(epoch);
                divergence = Some(with_epoch(e, epoch).to_string());
                break;
            }
            Err(e) => return Err(e),
        };
        risk_trace.push(r);
        observe(epoch, r);
        if epoch % cfg.eval_cadence == 0 {
            error_trace.push((epoch, fractional_error(model, &params, mesh)?));
            note_defect(&params, epoch)?;
        }
        if let Err(e) = adam_step(&mut params, &g, &mut adam, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon) {
            diverged_at = Some(epoch);
            divergence = Some(with_epoch(e, epoch).to_string());
            break;
        }
        if params.iter().any(|p| !p.is_finite()) {
            diverged_at = Some(epoch);
            divergence = Some("non-finite parameters after update".to_string());
            break;
        }
    }

    let final_risk = match risk.value(&params) {
        Ok(v) => v,
        Err(Error::NonFiniteLoss { .. }) => f64::NAN,
        Err(e) => return Err(e),
    };
    let final_fractional_error = fractional_error(model, &params, mesh)?;
    note_defect(&params, cfg.epochs)?;
    let min_fractional_error = error_trace
        .iter()
        .map(|e| e.1)
        .chain(core::iter::once(final_fractional_error))
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    Ok(RunRecord {
        repeat,
        init_seed,
        bulk_seed: seeds[0].unwrap_or(0),
        boundary_seed: seeds[1],
        initial_seed: seeds[2],
        net: exp.net,
        param_count: exp.net.param_count(),
        risk_trace,
        error_trace,
        final_risk,
        final_fractional_error,
        min_fractional_error,
        max_constraint_defect: max_defect,
        diverged_at,
        divergence,
        initial_params,
        final_params: params,
        wall_time_secs: None,
    })
}

fn with_epoch(e: Error, epoch: usize) -> Error {
    match e {
        Error::NonFiniteLoss { term, sample, .. } => Error::NonFiniteLoss {
            term,
            epoch: Some(epoch),
            sample,
        },
        Error::NonFiniteGradient { index, .. } => Error::NonFiniteGradient {
            epoch: Some(epoch),
            index,
        },
        other => other,
    }
}

/// Every repeat of an experiment, in order.
pub fn train(exp: &Experiment) -> Result<Vec<RunRecord>> {
    exp.validate()?;
    let mesh = exp.test_mesh(&exp.build_problem()?)?;
    (0..exp.train.repeats)
        .map(|r| train_once_on(exp, r, &mesh, |_, _| {}))
        .collect()
}
