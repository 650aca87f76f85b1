//! Built-in presets, one per experiment row of the published tables.

use pinn_core::losses::{RiskFamily, RiskSpec};
use pinn_core::sampling::FaceCounts;
use pinn_core::training::{SampleCounts, TestSpec};
use pinn_core::{Activation, ModelKind, ProblemKind, TrainConfig};

use crate::config::{ExperimentConfig, NetSizing};
use crate::error::{BenchError, Result};

const POISSON_DIMS: [usize; 4] = [1, 2, 3, 10];
const POISSON_DEFAULT_WIDTH: usize = 150;
const WIDE_SWEEP: [usize; 10] = [25, 50, 75, 100, 125, 150, 175, 200, 225, 250];
const NARROW_SWEEP: [usize; 6] = [25, 50, 75, 100, 125, 150];
const VISCID_NUS: [f64; 6] = [0.01, 0.1, 0.5, 1.0, 2.0, 10.0];
const BURGERS3_NUS: [f64; 4] = [0.01, 0.1, 0.5, 1.0];
/// x_c of the viscous travelling front.
const VISCID_X_C: f64 = 0.5;

struct PoissonSetting {
    tag: &'static str,
    family: RiskFamily,
    beta: f64,
    model: ModelKind,
    widths: &'static [usize],
}

fn poisson_settings() -> [PoissonSetting; 6] {
    let b = ModelKind::BoundaryIncluded;
    let b5 = ModelKind::BoundaryIncludedScaled { lambda: 5.0 };
    [
        PoissonSetting { tag: "energy_b_lambda1", family: RiskFamily::Energy, beta: 0.0, model: b, widths: &WIDE_SWEEP },
        PoissonSetting { tag: "energy_b_lambda5", family: RiskFamily::Energy, beta: 0.0, model: b5, widths: &NARROW_SWEEP },
        PoissonSetting { tag: "energy_p", family: RiskFamily::Energy, beta: 50.0, model: ModelKind::Vanilla, widths: &NARROW_SWEEP },
        PoissonSetting { tag: "residual_b_lambda1", family: RiskFamily::Residual, beta: 0.0, model: b, widths: &WIDE_SWEEP },
        PoissonSetting { tag: "residual_b_lambda5", family: RiskFamily::Residual, beta: 0.0, model: b5, widths: &NARROW_SWEEP },
        PoissonSetting { tag: "residual_p", family: RiskFamily::Residual, beta: 200.0, model: ModelKind::Vanilla, widths: &NARROW_SWEEP },
    ]
}

fn train(epochs: usize, lr: f64, eval_cadence: usize) -> TrainConfig {
    TrainConfig {
        epochs,
        learning_rate: lr,
        eval_cadence,
        ..TrainConfig::default()
    }
}

fn poisson(d: usize, s: &PoissonSetting, width: usize) -> ExperimentConfig {
    let name = if width == POISSON_DEFAULT_WIDTH {
        format!("poisson_d{d}_{}", s.tag)
    } else {
        format!("poisson_d{d}_{}_w{width}", s.tag)
    };
    let penalised = s.beta > 0.0;
    let bulk = match (penalised, d) {
        (true, _) => 10_000,
        (false, 10) => 5000,
        (false, _) => 1000,
    };
    let test = match d {
        1 => TestSpec::Grid(vec![1001]),
        2 => TestSpec::Grid(vec![101, 101]),
        3 => TestSpec::Grid(vec![41, 41, 41]),
        _ => TestSpec::Random { points: 10_000, seed: 7 },
    };
    let epochs = if d == 10 { 7000 } else { 2000 };
    ExperimentConfig {
        preset: Some(name),
        problem: ProblemKind::Poisson { dim: d },
        model: s.model,
        q_blend: None,
        risk: RiskSpec::new(s.family, s.beta),
        net: NetSizing {
            activation: Activation::Tanh,
            depth: 4,
            width: Some(width),
            param_target: None,
        },
        samples: SampleCounts {
            bulk,
            boundary: penalised.then_some(FaceCounts::PerFace(200)),
            initial: None,
        },
        test,
        train: train(epochs, 1e-4, 100),
        output_dir: None,
    }
}

fn model_tag(m: ModelKind) -> &'static str {
    match m {
        ModelKind::Vanilla => "vanilla",
        ModelKind::BoundaryIncluded => "boundary_included",
        ModelKind::InitialIncluded => "initial_included",
        ModelKind::BoundaryIncludedScaled { .. } => "boundary_included_scaled",
    }
}

const TIME_MODELS: [ModelKind; 3] = [ModelKind::Vanilla, ModelKind::BoundaryIncluded, ModelKind::InitialIncluded];

fn family_for(m: ModelKind) -> RiskFamily {
    match m {
        ModelKind::InitialIncluded => RiskFamily::InitialIncludedComposite,
        ModelKind::Vanilla => RiskFamily::VanillaComposite,
        _ => RiskFamily::BoundaryIncludedComposite,
    }
}

#[allow(clippy::too_many_arguments)]
fn time_preset(
    name: String,
    problem: ProblemKind,
    model: ModelKind,
    activation: Activation,
    depth: usize,
    params: usize,
    samples: SampleCounts,
    test: TestSpec,
    train: TrainConfig,
) -> ExperimentConfig {
    ExperimentConfig {
        preset: Some(name),
        problem,
        model,
        q_blend: None,
        risk: RiskSpec::new(family_for(model), 0.0),
        net: NetSizing {
            activation,
            depth,
            width: None,
            param_target: Some(params),
        },
        samples,
        test,
        train,
        output_dir: None,
    }
}

fn nu_tag(nu: f64) -> String {
    format!("{nu}").replace('.', "p")
}

/// Every built-in preset, in a stable order.
pub fn all() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for d in POISSON_DIMS {
        for s in poisson_settings() {
            for &w in s.widths {
                out.push(poisson(d, &s, w));
            }
        }
    }

    let b1_samples = SampleCounts {
        bulk: 1000,
        boundary: Some(FaceCounts::PerFace(500)),
        initial: Some(1000),
    };
    let grid2 = TestSpec::Grid(vec![101, 101]);
    for p in [57, 3441, 81201, 181801] {
        for m in TIME_MODELS {
            out.push(time_preset(
                format!("burgers1_inviscid_{}_{p}p", model_tag(m)),
                ProblemKind::Burgers1Inviscid { alpha: 1.0, beta_sol: 0.0 },
                m,
                Activation::Tanh,
                4,
                p,
                b1_samples.clone(),
                grid2.clone(),
                train(30_000, 1e-4, 100),
            ));
        }
    }
    for p in [57, 3441, 181801] {
        for nu in VISCID_NUS {
            for m in TIME_MODELS {
                out.push(time_preset(
                    format!("burgers1_viscid_nu{}_{}_{p}p", nu_tag(nu), model_tag(m)),
                    ProblemKind::Burgers1Viscid { nu, x_c: VISCID_X_C },
                    m,
                    Activation::Tanh,
                    4,
                    p,
                    b1_samples.clone(),
                    grid2.clone(),
                    train(30_000, 1e-4, 100),
                ));
            }
        }
    }

    let b2_samples = SampleCounts {
        bulk: 800,
        boundary: Some(FaceCounts::PerFace(200)),
        initial: Some(800),
    };
    for p in [66, 1794, 20802] {
        for m in TIME_MODELS {
            out.push(time_preset(
                format!("burgers2_{}_{p}p", model_tag(m)),
                ProblemKind::Burgers2Inviscid { t_max: 0.5, main_text_boundary: false },
                m,
                Activation::Tanh,
                4,
                p,
                b2_samples.clone(),
                TestSpec::Grid(vec![41, 41, 41]),
                train(30_000, 1e-3, 100),
            ));
        }
    }
    for m in TIME_MODELS {
        out.push(time_preset(
            format!("burgers2_near_blowup_{}_1794p", model_tag(m)),
            ProblemKind::Burgers2Inviscid { t_max: 0.705, main_text_boundary: false },
            m,
            Activation::Tanh,
            4,
            1794,
            b2_samples.clone(),
            TestSpec::Grid(vec![41, 41, 41]),
            train(30_000, 1e-3, 100),
        ));
    }

    let b3_samples = SampleCounts {
        bulk: 1000,
        boundary: Some(FaceCounts::PerAxis(vec![166, 166, 170])),
        initial: Some(1000),
    };
    for p in [75, 3603] {
        for nu in BURGERS3_NUS {
            for m in TIME_MODELS {
                out.push(time_preset(
                    format!("burgers3_nu{}_{}_{p}p", nu_tag(nu), model_tag(m)),
                    ProblemKind::Burgers3Viscid { re: 1.0 / nu, literal_decay: false },
                    m,
                    Activation::Tanh,
                    4,
                    p,
                    b3_samples.clone(),
                    TestSpec::Grid(vec![11, 11, 11, 11]),
                    train(10_000, 1e-3, 100),
                ));
            }
        }
    }

    let kdv = |n: usize| ProblemKind::Kdv { solitons: n, x_range: None, t_range: None };
    for p in [57, 541, 1009, 1981] {
        for m in TIME_MODELS {
            out.push(time_preset(
                format!("kdv1_{}_{p}p", model_tag(m)),
                kdv(1),
                m,
                Activation::Sigmoid,
                4,
                p,
                SampleCounts {
                    bulk: 500,
                    boundary: Some(FaceCounts::Total(250)),
                    initial: Some(250),
                },
                TestSpec::Grid(vec![101, 101]),
                train(60_000, 1e-4, 500),
            ));
        }
    }
    for p in [417, 2109, 4137, 10221] {
        for m in TIME_MODELS {
            out.push(time_preset(
                format!("kdv2_{}_{p}p", model_tag(m)),
                kdv(2),
                m,
                Activation::Sigmoid,
                4,
                p,
                SampleCounts {
                    bulk: 2000,
                    boundary: Some(FaceCounts::Total(1000)),
                    initial: Some(1000),
                },
                TestSpec::Grid(vec![301, 201]),
                train(30_000, 1e-4, 500),
            ));
        }
    }
    for m in TIME_MODELS {
        let mut c = time_preset(
            format!("kdv3_{}_3297p", model_tag(m)),
            kdv(3),
            m,
            Activation::Sin,
            5,
            3297,
            SampleCounts {
                bulk: 18_000,
                boundary: Some(FaceCounts::Total(914)),
                initial: Some(914),
            },
            TestSpec::Grid(vec![320, 320]),
            train(5000, 1e-3, 100),
        );
        c.net.width = Some(32);
        out.push(c);
    }
    out
}

pub fn names() -> Vec<String> {
    all().into_iter().filter_map(|c| c.preset).collect()
}

pub fn find(name: &str) -> Result<ExperimentConfig> {
    all()
        .into_iter()
        .find(|c| c.preset.as_deref() == Some(name))
        .ok_or_else(|| BenchError::UnknownPreset {
            name: name.to_string(),
            available: names().join("\n"),
        })
}
