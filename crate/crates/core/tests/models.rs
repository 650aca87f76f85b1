mod common;

use common::{interior_point, random_net, rel_close, rng, zoo};
use pinn_core::pde::PdeProblem;
use pinn_core::sampling::{sample_boundary, sample_initial, FaceCounts};
use pinn_core::{Activation, ModelKind, NetSpec, PredictorModel};
use rand::Rng;

fn model(kind: ModelKind, problem: PdeProblem, r: &mut rand_chacha::ChaCha8Rng) -> (PredictorModel, Vec<f64>) {
    let (spec, params) = random_net(r, problem.input_dim(), problem.components(), Activation::Tanh);
    let q = pinn_core::models::default_q_blend(&problem);
    (PredictorModel::new(kind, problem, spec, q).unwrap(), params)
}

#[test]
fn boundary_included_predictors_hit_boundary_data() {
    let mut r = rng(21);
    for problem in zoo() {
        for _ in 0..10 {
            let (m, params) = model(ModelKind::BoundaryIncluded, problem.clone(), &mut r);
            let defect = m.boundary_exactness_check(&params, 1000, r.random()).unwrap();
            assert!(defect <= 1e-12, "{}: {defect}", problem.label());
        }
    }
}

#[test]
fn scaled_predictor_is_exact_and_scaled() {
    let mut r = rng(22);
    let problem = PdeProblem::poisson(3).unwrap();
    let (plain, params) = model(ModelKind::BoundaryIncluded, problem.clone(), &mut r);
    let scaled = PredictorModel::new(
        ModelKind::BoundaryIncludedScaled { lambda: 5.0 },
        problem.clone(),
        plain.net,
        1e-9,
    )
    .unwrap();
    assert_eq!(scaled.output_scale(), 125.0);
    assert!(scaled.boundary_exactness_check(&params, 1000, 3).unwrap() <= 1e-12);
    for _ in 0..20 {
        let x = interior_point(&mut r, &problem, 0.0);
        let a = plain.predict(&params, &x).unwrap()[0];
        let b = scaled.predict(&params, &x).unwrap()[0];
        assert!(rel_close(b, 125.0 * a, 1e-14, 1e-300));
    }
}

#[test]
fn initial_included_predictors_hit_initial_data() {
    let mut r = rng(23);
    for problem in zoo().into_iter().filter(|p| p.has_time()) {
        for _ in 0..10 {
            let (m, params) = model(ModelKind::InitialIncluded, problem.clone(), &mut r);
            let defect = m.initial_exactness_check(&params, 1000, r.random()).unwrap();
            assert!(defect <= 1e-12, "{}: {defect}", problem.label());
        }
    }
}

#[test]
fn defects_are_measured_on_the_right_component() {
    let problem = PdeProblem::burgers3_viscid(100.0).unwrap();
    let set = sample_boundary(&problem, &FaceCounts::PerFace(5), 1).unwrap();
    assert_eq!(set.len(), 30);
    for (i, x) in set.iter().enumerate() {
        let (axis, high) = set.faces[i];
        let (lo, hi) = problem.bounds(axis);
        assert_eq!(x[axis], if high { hi } else { lo });
        assert_eq!(problem.face_component(axis), axis);
    }
    let init = sample_initial(&problem, 7, 2).unwrap();
    assert!(init.iter().all(|x| x[3] == 0.0));
}

#[test]
fn jet_values_agree_with_plain_prediction() {
    let mut r = rng(24);
    for problem in zoo() {
        for kind in [ModelKind::Vanilla, ModelKind::BoundaryIncluded] {
            let (m, params) = model(kind, problem.clone(), &mut r);
            let x = interior_point(&mut r, &problem, 0.0);
            let plain = m.predict(&params, &x).unwrap();
            for axis in 0..x.len() {
                let jets = m.predict_jets(&params, &x, axis, 3).unwrap();
                for (j, p) in jets.iter().zip(&plain) {
                    assert!(rel_close(j.value(), *p, 1e-13, 1e-15));
                }
            }
        }
    }
}

#[test]
fn invalid_pairings_are_rejected() {
    let spec = NetSpec::new(2, 1, 3, 4, Activation::Tanh).unwrap();
    let burgers = PdeProblem::burgers1_inviscid();
    assert!(PredictorModel::new(ModelKind::BoundaryIncludedScaled { lambda: 5.0 }, burgers.clone(), spec, 1e-9).is_err());
    let poisson = PdeProblem::poisson(2).unwrap();
    assert!(PredictorModel::new(ModelKind::InitialIncluded, poisson.clone(), spec, 1e-9).is_err());
    let wrong = NetSpec::new(3, 1, 3, 4, Activation::Tanh).unwrap();
    assert!(PredictorModel::new(ModelKind::Vanilla, poisson, wrong, 1e-9).is_err());
    let vanilla = PredictorModel::new(ModelKind::Vanilla, burgers, spec, 1e-9).unwrap();
    assert!(vanilla.boundary_exactness_check(&vec![0.0; spec.param_count()], 4, 1).is_err());
}
