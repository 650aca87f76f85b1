//! Invariant suites shared by the `verify` verb and the acceptance tests.

use pinn_core::fd::{characteristic_steps, fd_bundle, richardson};
use pinn_core::losses::{PreparedRisk, RiskFamily, RiskSpec, SampleSets};
use pinn_core::models::default_q_blend;
use pinn_core::network::{forward, init_params};
use pinn_core::sampling::{sample_boundary, sample_bulk, sample_initial, test_mesh, FaceCounts};
use pinn_core::training::fractional_error_of;
use pinn_core::{lift_constant, lift_seed, Activation, InitScheme, Jet, ModelKind, NetSpec, PdeProblem, PredictorModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub detail: String,
}

impl Outcome {
    fn new(name: &'static str, worst: f64, bound: f64, detail: String) -> Outcome {
        Outcome {
            name,
            passed: worst <= bound,
            worst,
            detail,
        }
    }
}

/// The problem instantiations the oracle suites run over.
pub fn problem_zoo() -> Result<Vec<PdeProblem>> {
    Ok(vec![
        PdeProblem::poisson(1)?,
        PdeProblem::poisson(3)?,
        PdeProblem::burgers1_inviscid(),
        PdeProblem::burgers1_viscid(0.1, 0.5)?,
        PdeProblem::burgers2_inviscid(0.5)?,
        PdeProblem::burgers3_viscid(100.0)?,
        PdeProblem::kdv(1)?,
        PdeProblem::kdv(2)?,
        PdeProblem::kdv(3)?,
    ])
}

fn random_net(r: &mut ChaCha8Rng, p: usize, q: usize, act: Activation, max_width: usize) -> Result<(NetSpec, Vec<f64>)> {
    let spec = NetSpec::new(p, q, r.random_range(2..=4), r.random_range(1..=max_width), act)?;
    let mut params = init_params(&spec, InitScheme::XavierNormal, r.random()).into_vec();
    for v in params.iter_mut() {
        if *v == 0.0 {
            *v = r.random_range(-0.5..0.5);
        }
    }
    Ok((spec, params))
}

fn interior(r: &mut ChaCha8Rng, problem: &PdeProblem, margin: f64) -> Vec<f64> {
    (0..problem.input_dim())
        .map(|a| {
            let (lo, hi) = problem.bounds(a);
            let l = hi - lo;
            r.random_range(lo + margin * l..hi - margin * l)
        })
        .collect()
}

fn rel_gap(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / (b.abs()).max(floor)
}

/// Orders 1 to 3 of random MLPs along every input axis against
/// Richardson-extrapolated central differences.
pub fn jets_vs_differences(pairs_per_activation: usize, seed: u64) -> Result<Outcome> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    // worst |jet - fd| as a multiple of the allowed gap max(1e-5 |fd|, 1e-7)
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for act in Activation::ALL {
        for _ in 0..pairs_per_activation {
            let p = r.random_range(1..=4);
            let (spec, params) = random_net(&mut r, p, 1, act, 32)?;
            let x: Vec<f64> = (0..p).map(|_| r.random_range(-1.0..1.0)).collect();
            for axis in 0..p {
                let jets = x
                    .iter()
                    .enumerate()
                    .map(|(a, v)| if a == axis { lift_seed(*v, 3) } else { lift_constant(*v, 3) })
                    .collect::<pinn_core::Result<Vec<Jet>>>()?;
                let jet = forward(&spec, &params, &jets)?[0];
                for (k, h) in [(1, 1e-3), (2, 2e-3), (3, 1e-2)] {
                    let f = |s: f64| {
                        let mut y = x.clone();
                        y[axis] += s;
                        forward(&spec, &params, &y).map_or(f64::NAN, |v| v[0])
                    };
                    let fd = richardson(f, 0.0, k, h)?;
                    let gap = (jet.derivative(k) - fd).abs() / (1e-5 * fd.abs()).max(1e-7);
                    worst = worst.max(if gap.is_nan() { f64::INFINITY } else { gap });
                    checks += 1;
                }
            }
        }
    }
    Ok(Outcome::new(
        "jets_vs_differences",
        worst,
        1.0,
        format!("{checks} derivative checks, worst gap {worst:.2} x tolerance"),
    ))
}

/// (problem, predictor, family, β) cases covering every risk family.
pub fn risk_cases() -> Result<Vec<(PdeProblem, ModelKind, RiskFamily, f64)>> {
    let p1 = PdeProblem::poisson(1)?;
    let p2 = PdeProblem::poisson(2)?;
    Ok(vec![
        (p2.clone(), ModelKind::BoundaryIncluded, RiskFamily::Residual, 0.0),
        (p1.clone(), ModelKind::Vanilla, RiskFamily::Residual, 200.0),
        (p2.clone(), ModelKind::BoundaryIncludedScaled { lambda: 5.0 }, RiskFamily::Residual, 0.0),
        (p2.clone(), ModelKind::BoundaryIncluded, RiskFamily::Energy, 0.0),
        (p1, ModelKind::Vanilla, RiskFamily::Energy, 50.0),
        (PdeProblem::burgers1_viscid(0.1, 0.5)?, ModelKind::Vanilla, RiskFamily::VanillaComposite, 0.0),
        (PdeProblem::burgers2_inviscid(0.5)?, ModelKind::Vanilla, RiskFamily::VanillaComposite, 0.0),
        (PdeProblem::kdv(1)?, ModelKind::Vanilla, RiskFamily::VanillaComposite, 0.0),
        (PdeProblem::burgers1_inviscid(), ModelKind::BoundaryIncluded, RiskFamily::BoundaryIncludedComposite, 0.0),
        (PdeProblem::burgers3_viscid(100.0)?, ModelKind::BoundaryIncluded, RiskFamily::BoundaryIncludedComposite, 0.0),
        (p2, ModelKind::BoundaryIncluded, RiskFamily::BoundaryIncludedComposite, 0.0),
        (PdeProblem::kdv(3)?, ModelKind::InitialIncluded, RiskFamily::InitialIncludedComposite, 0.0),
        (PdeProblem::burgers2_inviscid(0.5)?, ModelKind::InitialIncluded, RiskFamily::InitialIncludedComposite, 0.0),
    ])
}

fn small_risk(
    r: &mut ChaCha8Rng,
    problem: &PdeProblem,
    kind: ModelKind,
    family: RiskFamily,
    beta: f64,
    samples: usize,
) -> Result<(PreparedRisk, Vec<f64>)> {
    let act = Activation::ALL[r.random_range(0..3)];
    let spec = NetSpec::new(problem.input_dim(), problem.components(), r.random_range(2..=3), r.random_range(2..=8), act)?;
    let mut params = init_params(&spec, InitScheme::XavierNormal, r.random()).into_vec();
    for v in params.iter_mut() {
        *v += r.random_range(-0.2..0.2);
    }
    let model = PredictorModel::new(kind, problem.clone(), spec, default_q_blend(problem))?;
    let sets = SampleSets {
        bulk: Some(sample_bulk(problem, samples, r.random())?),
        boundary: Some(sample_boundary(problem, &FaceCounts::Total(samples), r.random())?),
        initial: if problem.has_time() {
            Some(sample_initial(problem, samples, r.random())?)
        } else {
            None
        },
    };
    Ok((PreparedRisk::new(model, RiskSpec::new(family, beta), &sets)?, params))
}

/// Largest gap between the tape gradient and central differences of the
/// risk, relative to each component (floored at 1e-3 of the largest one).
pub fn gradient_gap(risk: &PreparedRisk, params: &[f64]) -> Result<f64> {
    let (_, g) = risk.value_and_grad(params)?;
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        let h = 1e-5 * params[i].abs().max(1.0);
        let f = |s: f64| {
            let mut p = params.to_vec();
            p[i] += s;
            risk.value(&p).unwrap_or(f64::NAN)
        };
        let fd = richardson(f, 0.0, 1, h)?;
        worst = worst.max(rel_gap(g[i], fd, (1e-3 * scale).max(1e-12)));
    }
    Ok(worst)
}

/// Every risk family on small nets (width ≤ 8) and ≤ 16 samples per set.
pub fn gradients_vs_differences(configs_per_case: usize, seed: u64) -> Result<Outcome> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (problem, kind, family, beta) in risk_cases()? {
        for _ in 0..configs_per_case {
            let samples = r.random_range(4..=16);
            let (risk, params) = small_risk(&mut r, &problem, kind, family, beta, samples)?;
            worst = worst.max(gradient_gap(&risk, &params)?);
            n += 1;
        }
    }
    Ok(Outcome::new(
        "gradients_vs_differences",
        worst,
        1e-4,
        format!("{n} configurations, worst relative gap {worst:.2e}"),
    ))
}

/// Residual of every closed-form solution at interior points, with the
/// derivatives taken by finite differences.
pub fn exact_residuals(points: usize, seed: u64) -> Result<Outcome> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for problem in problem_zoo()? {
        let shape = problem.residual_shape();
        let steps = characteristic_steps(&problem, 1e-3);
        let mut w: f64 = 0.0;
        for _ in 0..points {
            let x = interior(&mut r, &problem, 0.05);
            let b = fd_bundle(&problem, &shape, &x, &steps, |p| {
                problem.exact_solution(p).unwrap_or_else(|_| vec![f64::NAN; problem.components()])
            })?;
            for v in problem.residual(&b)? {
                w = w.max(if v.is_finite() { v.abs() } else { f64::INFINITY });
            }
        }
        detail.push(format!("{} {w:.1e}", problem.label()));
        worst = worst.max(w);
    }
    Ok(Outcome::new("exact_residuals", worst, 1e-3, detail.join(", ")))
}

/// Boundary and initial defects of the constraint-including predictors.
pub fn constraint_exactness(nets: usize, points: usize, seed: u64) -> Result<Outcome> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for problem in problem_zoo()? {
        let mut kinds = vec![ModelKind::BoundaryIncluded];
        if problem.is_poisson() {
            kinds.push(ModelKind::BoundaryIncludedScaled { lambda: 5.0 });
        }
        if problem.has_time() {
            kinds.push(ModelKind::InitialIncluded);
        }
        for kind in kinds {
            for _ in 0..nets {
                let act = Activation::ALL[r.random_range(0..3)];
                let (spec, params) = random_net(&mut r, problem.input_dim(), problem.components(), act, 32)?;
                let model = PredictorModel::new(kind, problem.clone(), spec, default_q_blend(&problem))?;
                let d = if kind == ModelKind::InitialIncluded {
                    model.initial_exactness_check(&params, points, r.random())?
                } else {
                    model.boundary_exactness_check(&params, points, r.random())?
                };
                worst = worst.max(d);
                n += 1;
            }
        }
    }
    Ok(Outcome::new(
        "constraint_exactness",
        worst,
        1e-12,
        format!("{n} random predictors, worst defect {worst:.2e}"),
    ))
}

/// `E(exact) = 0`, `E(0) = 1`, `E(2 exact) = 1` on a mesh of every problem.
pub fn metric_identities() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for problem in problem_zoo()? {
        let res: Vec<usize> = (0..problem.input_dim()).map(|_| 7).collect();
        let mesh = test_mesh(&problem, &res)?;
        let exact = |x: &[f64]| problem.exact_solution(x).unwrap_or_default();
        let zero = fractional_error_of(&problem, &mesh, exact)?;
        let none = fractional_error_of(&problem, &mesh, |x| vec![0.0; exact(x).len()])?;
        let double = fractional_error_of(&problem, &mesh, |x| exact(x).iter().map(|v| 2.0 * v).collect())?;
        worst = worst.max(zero.abs()).max((none - 1.0).abs()).max((double - 1.0).abs());
    }
    Ok(Outcome::new(
        "metric_identities",
        worst,
        1e-12,
        format!("worst deviation {worst:.1e}"),
    ))
}

/// The fast suites, as run by `pinn-bench verify`.
pub fn quick_suite() -> Result<Vec<Outcome>> {
    Ok(vec![
        jets_vs_differences(100, 1)?,
        gradients_vs_differences(2, 2)?,
        exact_residuals(100, 3)?,
        constraint_exactness(10, 1000, 4)?,
        metric_identities()?,
    ])
}
