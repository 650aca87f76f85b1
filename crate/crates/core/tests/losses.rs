mod common;

use common::{gradient_gap, risk_cases, rng, small_risk};
use pinn_core::losses::{PreparedRisk, SampleSets};
use pinn_core::pde::PdeProblem;
use pinn_core::sampling::{SampleRole, SampleSet};
use pinn_core::{Activation, Jet, ModelKind, NetSpec, PredictorModel, RiskFamily, RiskSpec};
use std::f64::consts::PI;

fn set(role: SampleRole, dim: usize, pts: &[f64], faces: Vec<(usize, bool)>) -> SampleSet {
    SampleSet {
        role,
        dim,
        seed: 0,
        points: pts.to_vec(),
        faces,
    }
}

/// Net whose output is the constant `c`: all weights zero, last bias `c`.
fn constant_net(spec: &NetSpec, c: f64) -> Vec<f64> {
    let mut p = vec![0.0; spec.param_count()];
    let n = p.len();
    for v in &mut p[n - spec.output_dim..] {
        *v = c;
    }
    p
}

#[test]
fn zero_model_residual_is_mean_squared_source() {
    let problem = PdeProblem::poisson(1).unwrap();
    let spec = NetSpec::new(1, 1, 2, 3, Activation::Tanh).unwrap();
    let model = PredictorModel::new(ModelKind::Vanilla, problem, spec, 1e-9).unwrap();
    let sets = SampleSets {
        bulk: Some(set(SampleRole::Bulk, 1, &[0.25, 0.5, 0.75], vec![])),
        ..Default::default()
    };
    let risk = PreparedRisk::new(model, RiskSpec::new(RiskFamily::Residual, 0.0), &sets).unwrap();
    let v = risk.value(&constant_net(&spec, 0.0)).unwrap();
    let want = 2.0 / 3.0 * PI.powi(4);
    assert!((v - want).abs() <= 1e-10 * want, "{v} vs {want}");
}

#[test]
fn constant_net_boundary_penalty_is_c_squared() {
    let problem = PdeProblem::poisson(2).unwrap();
    let spec = NetSpec::new(2, 1, 3, 4, Activation::Sigmoid).unwrap();
    let model = PredictorModel::new(ModelKind::Vanilla, problem.clone(), spec, 1e-9).unwrap();
    let sets = SampleSets {
        bulk: Some(set(SampleRole::Bulk, 2, &[0.3, 0.4], vec![])),
        boundary: Some(set(
            SampleRole::Boundary,
            2,
            &[0.0, 0.2, 1.0, 0.7, 0.5, 0.0, 0.9, 1.0],
            vec![(0, false), (0, true), (1, false), (1, true)],
        )),
        ..Default::default()
    };
    let c = 0.37;
    let risk = PreparedRisk::new(model, RiskSpec::new(RiskFamily::BoundaryIncludedComposite, 0.0), &sets);
    // a boundary-included composite on a vanilla model still binds the boundary for poisson
    let (terms, _) = risk.unwrap().terms(&constant_net(&spec, c)).unwrap();
    let b = terms.iter().find(|t| t.0 == "boundary").unwrap().1;
    assert!((b - c * c).abs() <= 1e-14, "{b}");
}

#[test]
fn zero_model_initial_penalty_is_mean_squared_initial_data() {
    let problem = PdeProblem::kdv(1).unwrap();
    let spec = NetSpec::new(2, 1, 2, 3, Activation::Tanh).unwrap();
    let model = PredictorModel::new(ModelKind::Vanilla, problem, spec, 1e-9).unwrap();
    let sets = SampleSets {
        bulk: Some(set(SampleRole::Bulk, 2, &[0.5, 0.5], vec![])),
        boundary: Some(set(SampleRole::Boundary, 2, &[0.0, 0.5, 1.0, 0.5], vec![(0, false), (0, true)])),
        initial: Some(set(SampleRole::Initial, 2, &[-1.0, 0.0, 0.0, 0.0, 1.0, 0.0], vec![])),
    };
    let risk = PreparedRisk::new(model, RiskSpec::new(RiskFamily::VanillaComposite, 0.0), &sets).unwrap();
    let (terms, _) = risk.terms(&constant_net(&spec, 0.0)).unwrap();
    let got = terms.iter().find(|t| t.0 == "initial").unwrap().1;
    let sech2 = |x: f64| 1.0 / x.cosh().powi(2);
    let want = ((2.0 * sech2(-1.0)).powi(2) + 4.0 + (2.0 * sech2(1.0)).powi(2)) / 3.0;
    assert!((got - want).abs() <= 1e-13, "{got} vs {want}");
}

/// Independent recomputation from per-point jets and the plain residual.
fn brute_force(risk: &PreparedRisk, sets: &SampleSets, params: &[f64]) -> f64 {
    let model = &risk.model;
    let problem = &model.problem;
    let predict = |p: &[Jet]| model.predict(params, p);
    let bulk = sets.bulk.as_ref().unwrap();
    let mut r = 0.0;
    for x in bulk.iter() {
        let b = problem.jet_bundle(&problem.residual_shape(), x, predict).unwrap();
        r += problem.residual(&b).unwrap().iter().map(|v| v * v).sum::<f64>();
    }
    r /= bulk.len() as f64;
    let b = sets.boundary.as_ref().unwrap();
    let mut pen = 0.0;
    for (i, x) in b.iter().enumerate() {
        let c = problem.face_component(b.faces[i].0);
        let u = model.predict(params, x).unwrap()[c];
        pen += (u - problem.boundary_value(x).unwrap()[c]).powi(2);
    }
    pen /= b.len() as f64;
    r + risk.spec.beta_penalty * pen
}

#[test]
fn penalised_residual_matches_brute_force() {
    let mut r = common::rng(31);
    let (risk, params) = small_risk(&mut r, PdeProblem::poisson(2).unwrap(), ModelKind::Vanilla, RiskFamily::Residual, 200.0, 12);
    let problem = risk.model.problem.clone();
    let sets = SampleSets {
        bulk: Some(pinn_core::sampling::sample_bulk(&problem, 12, 5).unwrap()),
        boundary: Some(
            pinn_core::sampling::sample_boundary(&problem, &pinn_core::sampling::FaceCounts::Total(12), 6).unwrap(),
        ),
        initial: None,
    };
    let risk = PreparedRisk::new(risk.model.clone(), risk.spec, &sets).unwrap();
    let (terms, total) = risk.terms(&params).unwrap();
    let want = brute_force(&risk, &sets, &params);
    assert!((total - want).abs() <= 1e-10 * want.abs().max(1.0), "{total} vs {want}");
    let res = terms.iter().find(|t| t.0 == "residual").unwrap().1;
    let pen = terms.iter().find(|t| t.0 == "boundary").unwrap().1;
    assert!((total - (res + 200.0 * pen)).abs() <= 1e-12 * total.abs());
}

#[test]
fn gradients_match_central_differences() {
    let mut r = rng(32);
    for (problem, kind, family, beta) in risk_cases() {
        let label = format!("{} {} {}", problem.label(), kind.label(), family.label());
        let (risk, params) = small_risk(&mut r, problem, kind, family, beta, 8);
        let gap = gradient_gap(&risk, &params);
        assert!(gap <= 1e-4, "{label}: {gap}");
    }
}

#[test]
fn energy_is_rejected_off_poisson() {
    let problem = PdeProblem::burgers1_inviscid();
    let spec = NetSpec::new(2, 1, 2, 3, Activation::Tanh).unwrap();
    let model = PredictorModel::new(ModelKind::Vanilla, problem, spec, 1e-9).unwrap();
    assert!(RiskSpec::new(RiskFamily::Energy, 0.0).validate(&model).is_err());
    assert!(RiskSpec::new(RiskFamily::Residual, -1.0).validate(&model).is_err());
}

#[test]
fn non_finite_risk_names_the_sample() {
    let problem = PdeProblem::poisson(1).unwrap();
    let spec = NetSpec::new(1, 1, 2, 2, Activation::Tanh).unwrap();
    let model = PredictorModel::new(ModelKind::Vanilla, problem, spec, 1e-9).unwrap();
    let sets = SampleSets {
        bulk: Some(set(SampleRole::Bulk, 1, &[0.2, 0.6], vec![])),
        ..Default::default()
    };
    let risk = PreparedRisk::new(model, RiskSpec::new(RiskFamily::Residual, 0.0), &sets).unwrap();
    let mut params = constant_net(&spec, 0.0);
    params[0] = f64::NAN;
    match risk.value(&params) {
        Err(pinn_core::Error::NonFiniteLoss { term, .. }) => assert_eq!(term, "residual"),
        other => panic!("expected a non-finite loss, got {other:?}"),
    }
}
