#![allow(dead_code)]

use pinn_core::network::init_params;
use pinn_core::pde::PdeProblem;
use pinn_core::{Activation, InitScheme, NetSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random net with depth 2..=4 and width 1..=32.
pub fn random_net(r: &mut ChaCha8Rng, p: usize, q: usize, act: Activation) -> (NetSpec, Vec<f64>) {
    let depth = r.random_range(2..=4);
    let width = r.random_range(1..=32);
    let spec = NetSpec::new(p, q, depth, width, act).unwrap();
    let mut params = init_params(&spec, InitScheme::XavierNormal, r.random()).into_vec();
    // non-zero biases so every code path is exercised
    for v in params.iter_mut() {
        if *v == 0.0 {
            *v = r.random_range(-0.5..0.5);
        }
    }
    (spec, params)
}

/// Uniform point strictly inside the problem box, kept `margin` away from
/// every face (as a fraction of the side length).
pub fn interior_point(r: &mut ChaCha8Rng, problem: &PdeProblem, margin: f64) -> Vec<f64> {
    (0..problem.input_dim())
        .map(|a| {
            let (lo, hi) = problem.bounds(a);
            let l = hi - lo;
            r.random_range(lo + margin * l..hi - margin * l)
        })
        .collect()
}

pub fn rel_close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= (rel * b.abs()).max(floor)
}

/// The seven problem instantiations used by the oracle suites.
pub fn zoo() -> Vec<PdeProblem> {
    vec![
        PdeProblem::poisson(1).unwrap(),
        PdeProblem::poisson(3).unwrap(),
        PdeProblem::burgers1_inviscid(),
        PdeProblem::burgers1_viscid(0.1, 0.5).unwrap(),
        PdeProblem::burgers2_inviscid(0.5).unwrap(),
        PdeProblem::burgers3_viscid(100.0).unwrap(),
        PdeProblem::kdv(1).unwrap(),
        PdeProblem::kdv(2).unwrap(),
        PdeProblem::kdv(3).unwrap(),
    ]
}

use pinn_core::losses::{PreparedRisk, SampleSets};
use pinn_core::sampling::{sample_boundary, sample_bulk, sample_initial, FaceCounts};
use pinn_core::{ModelKind, PredictorModel, RiskFamily, RiskSpec};

/// A small risk over random sets, with random parameters.
pub fn small_risk(
    r: &mut ChaCha8Rng,
    problem: PdeProblem,
    kind: ModelKind,
    family: RiskFamily,
    beta: f64,
    samples: usize,
) -> (PreparedRisk, Vec<f64>) {
    let depth = r.random_range(2..=3);
    let width = r.random_range(2..=8);
    let spec = NetSpec::new(problem.input_dim(), problem.components(), depth, width, Activation::Tanh).unwrap();
    let mut params = init_params(&spec, InitScheme::XavierNormal, r.random()).into_vec();
    for v in params.iter_mut() {
        *v += r.random_range(-0.2..0.2);
    }
    let q = pinn_core::models::default_q_blend(&problem);
    let model = PredictorModel::new(kind, problem.clone(), spec, q).unwrap();
    let sets = SampleSets {
        bulk: Some(sample_bulk(&problem, samples, r.random()).unwrap()),
        boundary: Some(sample_boundary(&problem, &FaceCounts::Total(samples), r.random()).unwrap()),
        initial: problem
            .has_time()
            .then(|| sample_initial(&problem, samples, r.random()).unwrap()),
    };
    (PreparedRisk::new(model, RiskSpec::new(family, beta), &sets).unwrap(), params)
}

/// Every (problem, predictor, family, β) combination the gradient checks cover.
pub fn risk_cases() -> Vec<(PdeProblem, ModelKind, RiskFamily, f64)> {
    let p1 = PdeProblem::poisson(1).unwrap();
    let p2 = PdeProblem::poisson(2).unwrap();
    vec![
        (p2.clone(), ModelKind::BoundaryIncluded, RiskFamily::Residual, 0.0),
        (p1.clone(), ModelKind::Vanilla, RiskFamily::Residual, 200.0),
        (p2.clone(), ModelKind::BoundaryIncludedScaled { lambda: 5.0 }, RiskFamily::Residual, 0.0),
        (p2.clone(), ModelKind::BoundaryIncluded, RiskFamily::Energy, 0.0),
        (p1, ModelKind::Vanilla, RiskFamily::Energy, 500.0),
        (PdeProblem::burgers1_viscid(0.1, 0.5).unwrap(), ModelKind::Vanilla, RiskFamily::VanillaComposite, 0.0),
        (PdeProblem::burgers2_inviscid(0.5).unwrap(), ModelKind::Vanilla, RiskFamily::VanillaComposite, 0.0),
        (PdeProblem::kdv(1).unwrap(), ModelKind::Vanilla, RiskFamily::VanillaComposite, 0.0),
        (PdeProblem::burgers1_inviscid(), ModelKind::BoundaryIncluded, RiskFamily::BoundaryIncludedComposite, 0.0),
        (PdeProblem::burgers3_viscid(100.0).unwrap(), ModelKind::BoundaryIncluded, RiskFamily::BoundaryIncludedComposite, 0.0),
        (p2, ModelKind::BoundaryIncluded, RiskFamily::BoundaryIncludedComposite, 0.0),
        (PdeProblem::kdv(3).unwrap(), ModelKind::InitialIncluded, RiskFamily::InitialIncludedComposite, 0.0),
        (PdeProblem::burgers2_inviscid(0.5).unwrap(), ModelKind::InitialIncluded, RiskFamily::InitialIncludedComposite, 0.0),
    ]
}

/// Largest relative gap between the tape gradient and central differences.
pub fn gradient_gap(risk: &PreparedRisk, params: &[f64]) -> f64 {
    let (_, g) = risk.value_and_grad(params).unwrap();
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        let h = 1e-5 * params[i].abs().max(1.0);
        let f = |s: f64| {
            let mut p = params.to_vec();
            p[i] += s;
            risk.value(&p).unwrap()
        };
        let fd = pinn_core::fd::richardson(f, 0.0, 1, h).unwrap();
        // relative to the component, floored by a small fraction of the gradient norm
        let gap = (g[i] - fd).abs() / g[i].abs().max(1e-3 * scale).max(1e-12);
        worst = worst.max(gap);
    }
    worst
}
