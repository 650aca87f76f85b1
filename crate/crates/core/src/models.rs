//! Predictors: the raw network composed with a problem-specific blend.
//!
//! Every predictor is affine in the network output per component,
//! `u_c = N_c · w_c(x) + o_c(x)`, optionally followed by a constant factor.
//! The weights and offsets never depend on the parameters, so batches
//! precompute them once as jet arrays.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{contract, Error, Result};
use crate::jet::{lift_constant, lift_seed, Jet};
use crate::network::{self, NetSpec};
use crate::pde::{PdeProblem, ProblemKind};
use crate::sampling::{self, FaceCounts, SampleSet};
use crate::scalar::Scalar;
use crate::tape::{JetArray, NodeId, Tape};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ModelKind {
    Vanilla,
    BoundaryIncluded,
    InitialIncluded,
    /// Poisson only: `λ^d ∏(1-x_i)x_i · N`.
    BoundaryIncludedScaled { lambda: f64 },
}

impl ModelKind {
    pub fn label(&self) -> alloc::string::String {
        match self {
            ModelKind::Vanilla => "vanilla".into(),
            ModelKind::BoundaryIncluded => "boundary_included".into(),
            ModelKind::InitialIncluded => "initial_included".into(),
            ModelKind::BoundaryIncludedScaled { lambda } => alloc::format!("boundary_included_lambda{lambda}"),
        }
    }

    pub fn is_boundary_included(&self) -> bool {
        matches!(self, ModelKind::BoundaryIncluded | ModelKind::BoundaryIncludedScaled { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorModel {
    pub kind: ModelKind,
    pub problem: PdeProblem,
    pub net: NetSpec,
    /// Blend parameter of the soliton initial-included predictor.
    pub q_blend: f64,
}

/// Default `q` of the soliton initial blend.
pub fn default_q_blend(problem: &PdeProblem) -> f64 {
    match problem.kind() {
        ProblemKind::Kdv { solitons: 3, .. } => 1e-4,
        _ => 1e-9,
    }
}

impl PredictorModel {
    pub fn new(kind: ModelKind, problem: PdeProblem, net: NetSpec, q_blend: f64) -> Result<PredictorModel> {
        net.validate()?;
        if net.input_dim != problem.input_dim() || net.output_dim != problem.components() {
            return Err(contract("net dimensions do not match the problem"));
        }
        match kind {
            ModelKind::BoundaryIncludedScaled { lambda } => {
                if !problem.is_poisson() {
                    return Err(contract("the scaled boundary predictor is defined for poisson only"));
                }
                if !(lambda > 0.0) || !lambda.is_finite() {
                    return Err(contract("lambda must be positive"));
                }
            }
            ModelKind::InitialIncluded => {
                if !problem.has_time() {
                    return Err(contract("initial-included predictors need a time axis"));
                }
                if problem.is_kdv() && !(q_blend > 0.0) {
                    return Err(contract("q_blend must be positive"));
                }
            }
            _ => {}
        }
        Ok(PredictorModel {
            kind,
            problem,
            net,
            q_blend,
        })
    }

    /// Constant factor applied after the blend.
    pub fn output_scale(&self) -> f64 {
        match self.kind {
            ModelKind::BoundaryIncludedScaled { lambda } => libm::pow(lambda, self.problem.spatial_dim() as f64),
            _ => 1.0,
        }
    }

    /// `(w_c, o_c)` for each component at `point`.
    pub fn blend<S: Scalar>(&self, point: &[S]) -> Result<Vec<(S, S)>> {
        let p = &self.problem;
        let one = point[0].constant_like(1.0);
        let zero = point[0].constant_like(0.0);
        let comps = p.components();
        match self.kind {
            ModelKind::Vanilla => Ok(vec![(one, zero); comps]),
            ModelKind::BoundaryIncluded | ModelKind::BoundaryIncludedScaled { .. } => {
                if p.is_poisson() {
                    let mut w = one;
                    for (a, x) in point.iter().enumerate() {
                        let (lo, hi) = p.bounds(a);
                        let l = hi - lo;
                        w = w * ((x.rsub(hi) / l) * ((*x - lo) / l));
                    }
                    return Ok(vec![(w, zero)]);
                }
                let mut out = Vec::with_capacity(comps);
                for c in 0..comps {
                    // component c is pinned on the faces normal to axis c
                    let axis = if comps > 1 { c } else { 0 };
                    let (lo, hi) = p.bounds(axis);
                    let l = hi - lo;
                    let x = point[axis];
                    let s = (x - lo) / l;
                    let r = x.rsub(hi) / l;
                    let g_lo = p.face_data(axis, false, point)?[c];
                    let g_hi = p.face_data(axis, true, point)?[c];
                    out.push((s * r, r * g_lo + s * g_hi));
                }
                Ok(out)
            }
            ModelKind::InitialIncluded => {
                let Some(ta) = p.time_axis() else {
                    return Err(Error::NoInitialCondition);
                };
                let t = point[ta];
                let u0 = p.initial_value(&point[..ta])?;
                let mut out = Vec::with_capacity(comps);
                for u in u0 {
                    let pair = match p.kind() {
                        ProblemKind::Kdv { .. } => {
                            let q = self.q_blend;
                            let den = t * t + q;
                            (t * t / den, u * q / den)
                        }
                        ProblemKind::Burgers2Inviscid { t_max, .. } => (t, u * (t / *t_max).rsub(1.0)),
                        _ => (t, u * t.rsub(1.0)),
                    };
                    out.push(pair);
                }
                Ok(out)
            }
        }
    }

    /// Predicted field at one point, over any scalar kind.
    pub fn predict<S: Scalar>(&self, params: &[f64], point: &[S]) -> Result<Vec<S>> {
        let n = network::forward(&self.net, params, point)?;
        let blend = self.blend(point)?;
        let scale = self.output_scale();
        Ok(n.into_iter()
            .zip(blend)
            .map(|(v, (w, o))| {
                let u = v * w + o;
                if scale == 1.0 {
                    u
                } else {
                    u * scale
                }
            })
            .collect())
    }

    /// Field jets along input `axis` at order `order`.
    pub fn predict_jets(&self, params: &[f64], point: &[f64], axis: usize, order: usize) -> Result<Vec<Jet>> {
        let jets = seeded_point(point, Some(axis), order)?;
        self.predict(params, &jets)
    }

    /// Largest `|predict - g|` over `n_points` random boundary points.
    pub fn boundary_exactness_check(&self, params: &[f64], n_points: usize, seed: u64) -> Result<f64> {
        if !self.kind.is_boundary_included() {
            return Err(contract("boundary exactness applies to boundary-included predictors"));
        }
        let set = sampling::sample_boundary(&self.problem, &FaceCounts::Total(n_points), seed)?;
        let mut worst: f64 = 0.0;
        for (i, x) in set.iter().enumerate() {
            let (axis, _) = set.faces[i];
            let c = self.problem.face_component(axis);
            let pred = self.predict(params, x)?;
            let g = self.problem.boundary_value(x)?;
            worst = worst.max(libm::fabs(pred[c] - g[c]));
        }
        Ok(worst)
    }

    /// Largest `|predict(x, 0) - u₀(x)|` over `n_points` random initial points.
    pub fn initial_exactness_check(&self, params: &[f64], n_points: usize, seed: u64) -> Result<f64> {
        if self.kind != ModelKind::InitialIncluded {
            return Err(contract("initial exactness applies to initial-included predictors"));
        }
        let set = sampling::sample_initial(&self.problem, n_points, seed)?;
        let sd = self.problem.spatial_dim();
        let mut worst: f64 = 0.0;
        for x in set.iter() {
            let pred = self.predict(params, x)?;
            let u0 = self.problem.initial_value(&x[..sd])?;
            for (a, b) in pred.iter().zip(&u0) {
                worst = worst.max(libm::fabs(a - b));
            }
        }
        Ok(worst)
    }

    /// Precomputes inputs, weights and offsets for `points` seeded along
    /// each of `directions` (input axes) at jet order `order`. Columns are
    /// direction-major: `[dir 0: all points][dir 1: all points]...`. With no
    /// directions the batch holds plain values.
    pub fn prepare(&self, set: &SampleSet, directions: &[usize], order: usize) -> Result<PreparedBatch> {
        let dim = self.problem.input_dim();
        if set.dim != dim {
            return Err(Error::Shape {
                expected: dim,
                found: set.dim,
            });
        }
        let b = set.len();
        let dirs: Vec<Option<usize>> = if directions.is_empty() {
            vec![None]
        } else {
            directions.iter().map(|a| Some(*a)).collect()
        };
        let cols = dirs.len() * b;
        let comps = self.problem.components();
        let mut input = JetArray::zeros(order, dim, cols);
        let mut weight = vec![JetArray::zeros(order, 1, cols); comps];
        let mut offset = vec![JetArray::zeros(order, 1, cols); comps];
        let mut trivial_w = true;
        let mut trivial_o = true;
        for (d, dir) in dirs.iter().enumerate() {
            for (i, x) in set.iter().enumerate() {
                let col = d * b + i;
                let jets = seeded_point(x, *dir, order)?;
                for (a, j) in jets.iter().enumerate() {
                    input.set_jet(a, col, j);
                }
                for (c, (w, o)) in self.blend(&jets)?.into_iter().enumerate() {
                    trivial_w &= w.coeffs()[0] == 1.0 && w.coeffs()[1..].iter().all(|v| *v == 0.0);
                    trivial_o &= o.coeffs().iter().all(|v| *v == 0.0);
                    weight[c].set_jet(0, col, &w);
                    offset[c].set_jet(0, col, &o);
                }
            }
        }
        Ok(PreparedBatch {
            batch: b,
            directions: directions.to_vec(),
            order,
            input,
            weight: if trivial_w { None } else { Some(weight) },
            offset: if trivial_o { None } else { Some(offset) },
        })
    }

    /// Records the predictor on `tape`; one `1 x cols` node per component.
    pub fn record(&self, tape: &mut Tape<'_>, batch: &PreparedBatch) -> Vec<NodeId> {
        let x = tape.constant(batch.input.clone());
        // every direction holds the same points, so values repeat per batch
        let out = network::record_forward_periodic(tape, &self.net, x, batch.batch);
        let cols = batch.input.cols();
        let scale = self.output_scale();
        (0..self.problem.components())
            .map(|c| {
                let mut u = tape.select(out, c, 0, cols);
                if let Some(w) = &batch.weight {
                    u = tape.mul_const(u, w[c].clone());
                }
                if let Some(o) = &batch.offset {
                    u = tape.add_const(u, o[c].clone());
                }
                if scale != 1.0 {
                    u = tape.scale(u, scale);
                }
                u
            })
            .collect()
    }

    /// Values at every point of `set`, `[point][component]` flattened.
    /// Runs the batched network in chunks.
    pub fn predict_set(&self, params: &[f64], set: &SampleSet) -> Result<Vec<f64>> {
        const CHUNK: usize = 4096;
        let comps = self.problem.components();
        let mut out = Vec::with_capacity(set.len() * comps);
        let mut start = 0;
        while start < set.len() {
            let end = (start + CHUNK).min(set.len());
            let sub = SampleSet {
                role: set.role,
                dim: set.dim,
                seed: set.seed,
                points: set.points[start * set.dim..end * set.dim].to_vec(),
                faces: Vec::new(),
            };
            let batch = self.prepare(&sub, &[], 0)?;
            let mut tape = Tape::new(params);
            let nodes = self.record(&mut tape, &batch);
            for i in 0..end - start {
                for n in &nodes {
                    out.push(tape.value(*n).value(0, i));
                }
            }
            start = end;
        }
        Ok(out)
    }
}

/// Precomputed constants for one batch of points.
#[derive(Debug, Clone)]
pub struct PreparedBatch {
    pub batch: usize,
    pub directions: Vec<usize>,
    pub order: usize,
    input: JetArray,
    weight: Option<Vec<JetArray>>,
    offset: Option<Vec<JetArray>>,
}

impl PreparedBatch {
    /// Column range of direction `d`.
    pub fn columns(&self, d: usize) -> (usize, usize) {
        (d * self.batch, self.batch)
    }
}

/// Lifts a point to jets, seeding `axis` (if any) and holding the rest fixed.
pub fn seeded_point(point: &[f64], axis: Option<usize>, order: usize) -> Result<Vec<Jet>> {
    point
        .iter()
        .enumerate()
        .map(|(a, v)| {
            if Some(a) == axis {
                lift_seed(*v, order)
            } else {
                lift_constant(*v, order)
            }
        })
        .collect()
}
