//! Empirical risks assembled on the tape.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{config, contract, Error, Result};
use crate::models::{PredictorModel, PreparedBatch};
use crate::pde::{BundleShape, DerivativeBundle};
use crate::sampling::{SampleRole, SampleSet};
use crate::tape::{JetArray, NodeId, Tape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RiskFamily {
    /// Mean squared residual, plus `β ×` boundary penalty when `β > 0`.
    Residual,
    /// Ritz energy, plus `β ×` boundary penalty when `β > 0`. Poisson only.
    Energy,
    /// Residual + boundary + initial terms, unit weights.
    VanillaComposite,
    /// Residual + initial terms.
    BoundaryIncludedComposite,
    /// Residual + boundary terms.
    InitialIncludedComposite,
}

impl RiskFamily {
    pub fn label(self) -> &'static str {
        match self {
            RiskFamily::Residual => "residual",
            RiskFamily::Energy => "energy",
            RiskFamily::VanillaComposite => "vanilla_composite",
            RiskFamily::BoundaryIncludedComposite => "boundary_included_composite",
            RiskFamily::InitialIncludedComposite => "initial_included_composite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiskSpec {
    pub family: RiskFamily,
    #[cfg_attr(feature = "serde", serde(default))]
    pub beta_penalty: f64,
}

impl RiskSpec {
    pub fn new(family: RiskFamily, beta_penalty: f64) -> RiskSpec {
        RiskSpec { family, beta_penalty }
    }

    pub fn binds_boundary(&self, has_time: bool) -> bool {
        match self.family {
            RiskFamily::Residual | RiskFamily::Energy => self.beta_penalty > 0.0,
            RiskFamily::VanillaComposite | RiskFamily::InitialIncludedComposite => true,
            RiskFamily::BoundaryIncludedComposite => !has_time,
        }
    }

    pub fn binds_initial(&self, has_time: bool) -> bool {
        has_time
            && matches!(
                self.family,
                RiskFamily::VanillaComposite | RiskFamily::BoundaryIncludedComposite
            )
    }

    /// Weight on the boundary term.
    pub fn boundary_weight(&self) -> f64 {
        match self.family {
            RiskFamily::Residual | RiskFamily::Energy => self.beta_penalty,
            _ => 1.0,
        }
    }

    pub fn validate(&self, model: &PredictorModel) -> Result<()> {
        if !(self.beta_penalty >= 0.0) || !self.beta_penalty.is_finite() {
            return Err(config("beta_penalty must be finite and non-negative"));
        }
        if self.family == RiskFamily::Energy && !model.problem.is_poisson() {
            return Err(contract("energy risk is defined for poisson only"));
        }
        if self.family == RiskFamily::InitialIncludedComposite && !model.problem.has_time() {
            return Err(config("initial-included composite needs a time-dependent problem"));
        }
        Ok(())
    }
}

/// The collocation sets a risk may draw on.
#[derive(Debug, Clone, Default)]
pub struct SampleSets {
    pub bulk: Option<SampleSet>,
    pub boundary: Option<SampleSet>,
    pub initial: Option<SampleSet>,
}

struct PreparedBulk {
    batch: PreparedBatch,
    shape: BundleShape,
    forcing: Option<JetArray>,
}

struct PreparedPenalty {
    batch: PreparedBatch,
    /// Per component: `(mask, -mask * target)`, `None` for components with
    /// no constraint; a `None` mask means all ones.
    terms: Vec<Option<(Option<JetArray>, JetArray)>>,
    weight: f64,
}

/// Named per-term nodes plus the total.
#[derive(Debug, Clone)]
pub struct RiskNodes {
    pub total: NodeId,
    pub terms: Vec<(&'static str, NodeId)>,
    /// Per-sample contributions, used to locate non-finite values.
    pub per_sample: Vec<(&'static str, NodeId)>,
}

/// A risk bound to a model and fixed sample sets, with all
/// parameter-independent constants precomputed.
pub struct PreparedRisk {
    pub model: PredictorModel,
    pub spec: RiskSpec,
    bulk: PreparedBulk,
    boundary: Option<PreparedPenalty>,
    initial: Option<PreparedPenalty>,
}

fn directions_for(shape: &BundleShape, time_axis: Option<usize>) -> (Vec<usize>, usize) {
    let dirs = shape.directions(time_axis);
    let order = dirs.iter().map(|d| d.1).max().unwrap_or(0);
    (dirs.into_iter().map(|d| d.0).collect(), order)
}

impl PreparedRisk {
    pub fn new(model: PredictorModel, spec: RiskSpec, sets: &SampleSets) -> Result<PreparedRisk> {
        spec.validate(&model)?;
        let problem = &model.problem;
        let has_time = problem.has_time();
        let bulk_set = sets.bulk.as_ref().ok_or_else(|| config("risk needs a bulk sample set"))?;
        if bulk_set.is_empty() {
            return Err(config("bulk sample set is empty"));
        }
        let shape = match spec.family {
            RiskFamily::Energy => problem.energy_shape()?,
            _ => problem.residual_shape(),
        };
        let (dirs, order) = directions_for(&shape, problem.time_axis());
        let batch = model.prepare(bulk_set, &dirs, order)?;
        let forcing = if shape.forcing {
            let sd = problem.spatial_dim();
            let vals = bulk_set
                .iter()
                .map(|x| problem.source_term(&x[..sd]))
                .collect::<Result<Vec<f64>>>()?;
            Some(JetArray::constant_row(0, &vals))
        } else {
            None
        };
        let bulk = PreparedBulk { batch, shape, forcing };

        let boundary = if spec.binds_boundary(has_time) {
            let set = sets
                .boundary
                .as_ref()
                .ok_or_else(|| config("risk family needs a boundary sample set"))?;
            Some(prepare_penalty(&model, set, spec.boundary_weight())?)
        } else {
            None
        };
        let initial = if spec.binds_initial(has_time) {
            let set = sets
                .initial
                .as_ref()
                .ok_or_else(|| config("risk family needs an initial sample set"))?;
            Some(prepare_penalty(&model, set, 1.0)?)
        } else {
            None
        };
        Ok(PreparedRisk {
            model,
            spec,
            bulk,
            boundary,
            initial,
        })
    }

    pub fn record(&self, tape: &mut Tape<'_>) -> Result<RiskNodes> {
        let mut terms = Vec::new();
        let mut per_sample = Vec::new();
        let (bulk_term, bulk_samples) = self.record_bulk(tape)?;
        terms.push((bulk_label(self.spec.family), bulk_term));
        per_sample.push((bulk_label(self.spec.family), bulk_samples));
        let mut total = bulk_term;
        if let Some(b) = &self.boundary {
            let (m, s) = record_penalty(&self.model, tape, b);
            terms.push(("boundary", m));
            per_sample.push(("boundary", s));
            let w = if b.weight == 1.0 { m } else { tape.scale(m, b.weight) };
            total = tape.add(total, w);
        }
        if let Some(i) = &self.initial {
            let (m, s) = record_penalty(&self.model, tape, i);
            terms.push(("initial", m));
            per_sample.push(("initial", s));
            total = tape.add(total, m);
        }
        Ok(RiskNodes {
            total,
            terms,
            per_sample,
        })
    }

    fn record_bulk(&self, tape: &mut Tape<'_>) -> Result<(NodeId, NodeId)> {
        let problem = &self.model.problem;
        let b = &self.bulk.batch;
        let comps = self.model.record(tape, b);
        let bundle = bundle_nodes(tape, &comps, b, &self.bulk.shape, problem.time_axis(), &self.bulk.forcing);
        let per_sample = if self.spec.family == RiskFamily::Energy {
            let Some(dx) = &bundle.dx else {
                return Err(contract("energy bundle lacks first derivatives"));
            };
            let mut grad2 = tape.mul(dx[0][0], dx[0][0]);
            for d in &dx[0][1..] {
                let sq = tape.mul(*d, *d);
                grad2 = tape.add(grad2, sq);
            }
            let half = tape.scale(grad2, 0.5);
            let Some(f) = &self.bulk.forcing else {
                return Err(contract("energy bundle lacks the source term"));
            };
            let fu = tape.mul_const(bundle.value[0], f.clone());
            tape.sub(half, fu)
        } else {
            let r = problem.residual_with(tape, &bundle)?;
            let mut acc = tape.mul(r[0], r[0]);
            for rc in &r[1..] {
                let sq = tape.mul(*rc, *rc);
                acc = tape.add(acc, sq);
            }
            acc
        };
        Ok((tape.mean(per_sample), per_sample))
    }

    /// Risk value at `params`.
    pub fn value(&self, params: &[f64]) -> Result<f64> {
        let mut tape = Tape::new(params);
        let nodes = self.record(&mut tape)?;
        self.check_finite(&tape, &nodes)?;
        Ok(tape.scalar(nodes.total))
    }

    /// Individual terms (unweighted) and the total.
    pub fn terms(&self, params: &[f64]) -> Result<(Vec<(&'static str, f64)>, f64)> {
        let mut tape = Tape::new(params);
        let nodes = self.record(&mut tape)?;
        self.check_finite(&tape, &nodes)?;
        let t = nodes.terms.iter().map(|(n, id)| (*n, tape.scalar(*id))).collect();
        Ok((t, tape.scalar(nodes.total)))
    }

    pub fn value_and_grad(&self, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut tape = Tape::new(params);
        let nodes = self.record(&mut tape)?;
        self.check_finite(&tape, &nodes)?;
        let g = tape.gradient(nodes.total)?;
        Ok((tape.scalar(nodes.total), g))
    }

    fn check_finite(&self, tape: &Tape<'_>, nodes: &RiskNodes) -> Result<()> {
        if tape.scalar(nodes.total).is_finite() {
            return Ok(());
        }
        for (name, id) in &nodes.per_sample {
            let v = tape.value(*id);
            if let Some(i) = (0..v.cols()).find(|i| !v.value(0, *i).is_finite()) {
                return Err(Error::NonFiniteLoss {
                    term: name,
                    epoch: None,
                    sample: Some(i),
                });
            }
        }
        Err(Error::NonFiniteLoss {
            term: "total",
            epoch: None,
            sample: None,
        })
    }
}

fn bulk_label(f: RiskFamily) -> &'static str {
    if f == RiskFamily::Energy {
        "energy"
    } else {
        "residual"
    }
}

/// Slices the per-direction jets into the derivative bundle a residual reads.
fn bundle_nodes(
    tape: &mut Tape<'_>,
    comps: &[NodeId],
    batch: &PreparedBatch,
    shape: &BundleShape,
    time_axis: Option<usize>,
    forcing: &Option<JetArray>,
) -> DerivativeBundle<NodeId> {
    let dir_index = |axis: usize| batch.directions.iter().position(|a| *a == axis);
    let coef = |tape: &mut Tape<'_>, c: usize, axis: Option<usize>, k: usize| {
        let d = axis.and_then(dir_index).unwrap_or(0);
        let (start, len) = batch.columns(d);
        let s = tape.select(comps[c], 0, start, len);
        tape.coefficient(s, k)
    };
    let n = comps.len();
    let sd = shape.spatial_dim;
    let value = (0..n).map(|c| coef(tape, c, None, 0)).collect();
    let dt = shape.dt.then(|| (0..n).map(|c| coef(tape, c, time_axis, 1)).collect());
    let dx = shape
        .dx
        .then(|| (0..n).map(|c| (0..sd).map(|a| coef(tape, c, Some(a), 1)).collect()).collect());
    let dxx = shape
        .dxx
        .then(|| (0..n).map(|c| (0..sd).map(|a| coef(tape, c, Some(a), 2)).collect()).collect());
    let dxxx = shape.dxxx.then(|| (0..n).map(|c| coef(tape, c, Some(0), 3)).collect());
    let forcing = forcing.as_ref().map(|f| tape.constant(f.clone()));
    DerivativeBundle {
        value,
        dt,
        dx,
        dxx,
        dxxx,
        forcing,
    }
}

fn prepare_penalty(model: &PredictorModel, set: &SampleSet, weight: f64) -> Result<PreparedPenalty> {
    if set.is_empty() {
        return Err(config("penalty sample set is empty"));
    }
    let problem = &model.problem;
    let comps = problem.components();
    let m = set.len();
    let batch = model.prepare(set, &[], 0)?;
    let mut masks = vec![vec![0.0; m]; comps];
    let mut targets = vec![vec![0.0; m]; comps];
    match set.role {
        SampleRole::Boundary => {
            if set.faces.len() != m {
                return Err(contract("boundary set lacks face tags"));
            }
            for (i, x) in set.iter().enumerate() {
                let (axis, high) = set.faces[i];
                let c = problem.face_component(axis);
                masks[c][i] = 1.0;
                targets[c][i] = problem.face_data(axis, high, x)?[c];
            }
        }
        SampleRole::Initial => {
            let sd = problem.spatial_dim();
            for (i, x) in set.iter().enumerate() {
                for (c, v) in problem.initial_value(&x[..sd])?.into_iter().enumerate() {
                    masks[c][i] = 1.0;
                    targets[c][i] = v;
                }
            }
        }
        _ => return Err(contract("penalty sets must be boundary or initial sets")),
    }
    let terms = (0..comps)
        .map(|c| {
            if masks[c].iter().all(|v| *v == 0.0) {
                return None;
            }
            let full = masks[c].iter().all(|v| *v == 1.0);
            let neg: Vec<f64> = targets[c].iter().zip(&masks[c]).map(|(t, k)| -t * k).collect();
            Some((
                (!full).then(|| JetArray::constant_row(0, &masks[c])),
                JetArray::constant_row(0, &neg),
            ))
        })
        .collect();
    Ok(PreparedPenalty { batch, terms, weight })
}

/// Mean over points of the summed squared defects of the pinned components.
fn record_penalty(model: &PredictorModel, tape: &mut Tape<'_>, p: &PreparedPenalty) -> (NodeId, NodeId) {
    let comps = model.record(tape, &p.batch);
    let mut acc: Option<NodeId> = None;
    for (c, term) in p.terms.iter().enumerate() {
        let Some((mask, neg_target)) = term else { continue };
        let mut d = comps[c];
        if let Some(m) = mask {
            d = tape.mul_const(d, m.clone());
        }
        d = tape.add_const(d, neg_target.clone());
        let sq = tape.mul(d, d);
        acc = Some(match acc {
            Some(a) => tape.add(a, sq),
            None => sq,
        });
    }
    let per_sample = match acc {
        Some(a) => a,
        None => {
            let z = tape.scale(comps[0], 0.0);
            tape.mul(z, z)
        }
    };
    (tape.mean(per_sample), per_sample)
}
