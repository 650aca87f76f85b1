mod common;

use pinn_core::losses::RiskFamily;
use pinn_core::sampling::{test_mesh, FaceCounts};
use pinn_core::training::{fractional_error_of, train_once, SampleCounts, TestSpec};
use pinn_core::{Activation, Experiment, ModelKind, NetSpec, PdeProblem, ProblemKind, RiskSpec, TrainConfig};

fn experiment(epochs: usize) -> Experiment {
    Experiment {
        problem: ProblemKind::Burgers1Inviscid {
            alpha: 1.0,
            beta_sol: 1.0,
        },
        model: ModelKind::BoundaryIncluded,
        q_blend: None,
        risk: RiskSpec::new(RiskFamily::BoundaryIncludedComposite, 0.0),
        net: NetSpec::new(2, 1, 3, 6, Activation::Tanh).unwrap(),
        samples: SampleCounts {
            bulk: 40,
            boundary: Some(FaceCounts::PerFace(10)),
            initial: Some(10),
        },
        test: TestSpec::Grid(vec![11, 11]),
        train: TrainConfig {
            epochs,
            learning_rate: 1e-3,
            repeats: 1,
            eval_cadence: 10,
            ..TrainConfig::default()
        },
    }
}

#[test]
fn fractional_error_identities() {
    let problem = PdeProblem::kdv(2).unwrap();
    let mesh = test_mesh(&problem, &[15, 9]).unwrap();
    let exact = |x: &[f64]| problem.exact_solution(x).unwrap();
    let e0 = fractional_error_of(&problem, &mesh, exact).unwrap();
    let e1 = fractional_error_of(&problem, &mesh, |x| vec![0.0; exact(x).len()]).unwrap();
    let e2 = fractional_error_of(&problem, &mesh, |x| exact(x).iter().map(|v| 2.0 * v).collect()).unwrap();
    assert!(e0.abs() <= 1e-12);
    assert!((e1 - 1.0).abs() <= 1e-12);
    assert!((e2 - 1.0).abs() <= 1e-12);
}

#[test]
fn fractional_error_with_zero_field_is_undefined() {
    let problem = PdeProblem::poisson(1).unwrap();
    let mesh = test_mesh(&problem, &[2]).unwrap();
    // the two grid points are the zeros of sin(πx)
    let r = fractional_error_of(&problem, &mesh, |_| vec![1.0]);
    assert!(r.is_err() || r.unwrap() > 1e20);
}

#[test]
fn zero_epochs_leave_parameters_untouched() {
    let rec = train_once(&experiment(0), 0).unwrap();
    assert!(rec.risk_trace.is_empty());
    assert_eq!(rec.initial_params, rec.final_params);
    assert!(rec.final_risk.is_finite());
    assert!(rec.diverged_at.is_none());
}

#[test]
fn identical_seeds_give_identical_traces() {
    let exp = experiment(100);
    let a = train_once(&exp, 0).unwrap();
    let b = train_once(&exp, 0).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(a.risk_trace.len(), 100);
    assert_eq!(bits(&a.risk_trace), bits(&b.risk_trace));
    assert_eq!(bits(&a.final_params), bits(&b.final_params));
    let c = train_once(&exp, 1).unwrap();
    assert_ne!(bits(&a.risk_trace), bits(&c.risk_trace));
}

#[test]
fn training_reduces_risk_and_keeps_constraints() {
    let rec = train_once(&experiment(300), 0).unwrap();
    assert!(rec.final_risk < rec.risk_trace[0]);
    assert!(rec.max_constraint_defect.unwrap() <= 1e-12);
    assert_eq!(rec.error_trace.len(), 30);
    assert!(rec.min_fractional_error <= rec.final_fractional_error);
}

#[test]
fn divergence_is_reported_not_raised() {
    let mut exp = experiment(50);
    exp.train.learning_rate = 1e300;
    let rec = train_once(&exp, 0).unwrap();
    assert!(rec.diverged_at.is_some());
    assert!(rec.divergence.is_some());
}

#[test]
fn missing_sample_counts_are_config_errors() {
    let mut exp = experiment(1);
    exp.samples.initial = None;
    assert!(matches!(exp.validate(), Err(pinn_core::Error::Config(_))));
    let mut exp = experiment(1);
    exp.train.eval_cadence = 0;
    assert!(exp.validate().is_err());
}
