//! Uniform-width feed-forward nets and their flat parameter vectors.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::activation::Activation;
use crate::error::{config, Error, Result};
use crate::scalar::Scalar;
use crate::tape::{NodeId, Tape};

/// `m` affine maps of inner width `n` from `p` inputs to `q` outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub depth: usize,
    pub width: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum InitScheme {
    #[default]
    XavierNormal,
    XavierUniform,
}

impl NetSpec {
    pub fn new(input_dim: usize, output_dim: usize, depth: usize, width: usize, activation: Activation) -> Result<NetSpec> {
        let spec = NetSpec {
            input_dim,
            output_dim,
            depth,
            width,
            activation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 2 || self.width < 1 || self.input_dim < 1 || self.output_dim < 1 {
            return Err(config(alloc::format!(
                "invalid net: need depth >= 2 and positive dims, got p={} q={} m={} n={}",
                self.input_dim,
                self.output_dim,
                self.depth,
                self.width
            )));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        param_count(self)
    }

    /// `(fan_in, fan_out)` of each affine map in order.
    pub fn layers(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::with_capacity(self.depth);
        for l in 0..self.depth {
            let fan_in = if l == 0 { self.input_dim } else { self.width };
            let fan_out = if l + 1 == self.depth { self.output_dim } else { self.width };
            v.push((fan_in, fan_out));
        }
        v
    }
}

pub fn param_count(spec: &NetSpec) -> usize {
    let (p, q, m, n) = (spec.input_dim, spec.output_dim, spec.depth, spec.width);
    (p * n + n) + (m - 2) * (n * n + n) + (n * q + q)
}

/// Inner width that hits `target` parameters exactly at depth `depth`.
pub fn solve_width(input_dim: usize, output_dim: usize, depth: usize, target: usize) -> Option<usize> {
    if depth < 2 {
        return None;
    }
    let count = |width| {
        param_count(&NetSpec {
            input_dim,
            output_dim,
            depth,
            width,
            activation: Activation::Tanh,
        })
    };
    // the count is increasing in the width
    (1..=target).find(|&n| count(n) >= target).filter(|&n| count(n) == target)
}

/// Flat parameters, layer by layer: weights row-major (`fan_out x fan_in`),
/// then the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(spec: &NetSpec, values: Vec<f64>) -> Result<ParamVector> {
        let expected = spec.param_count();
        if values.len() != expected {
            return Err(Error::Shape {
                expected,
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { epoch: None, index });
        }
        Ok(ParamVector(values))
    }

    pub fn zeros(spec: &NetSpec) -> ParamVector {
        ParamVector(alloc::vec![0.0; spec.param_count()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

pub fn init_xavier(spec: &NetSpec, seed: u64) -> ParamVector {
    init_params(spec, InitScheme::XavierNormal, seed)
}

/// Xavier weights (normal with variance `2/(fan_in+fan_out)`, or the uniform
/// variant with the same variance), zero biases.
pub fn init_params(spec: &NetSpec, scheme: InitScheme, seed: u64) -> ParamVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(spec.param_count());
    for (fan_in, fan_out) in spec.layers() {
        let var = 2.0 / (fan_in + fan_out) as f64;
        match scheme {
            InitScheme::XavierNormal => {
                let normal = match Normal::new(0.0, libm::sqrt(var)) {
                    Ok(n) => n,
                    Err(_) => unreachable!("variance is positive and finite"),
                };
                out.extend((0..fan_in * fan_out).map(|_| normal.sample(&mut rng)));
            }
            InitScheme::XavierUniform => {
                let a = libm::sqrt(3.0 * var);
                out.extend((0..fan_in * fan_out).map(|_| rng.random_range(-a..a)));
            }
        }
        out.extend(core::iter::repeat_n(0.0, fan_out));
    }
    ParamVector(out)
}

/// `A_m(s(A_{m-1}(... s(A_1 x))))` over any scalar kind.
pub fn forward<S: Scalar>(spec: &NetSpec, params: &[f64], x: &[S]) -> Result<Vec<S>> {
    if x.len() != spec.input_dim {
        return Err(Error::Shape {
            expected: spec.input_dim,
            found: x.len(),
        });
    }
    if params.len() != spec.param_count() {
        return Err(Error::Shape {
            expected: spec.param_count(),
            found: params.len(),
        });
    }
    let layers = spec.layers();
    let mut cur: Vec<S> = x.to_vec();
    let mut offset = 0;
    for (l, (fan_in, fan_out)) in layers.iter().enumerate() {
        let w = &params[offset..offset + fan_in * fan_out];
        let b = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        let mut next = Vec::with_capacity(*fan_out);
        for r in 0..*fan_out {
            let row = &w[r * fan_in..(r + 1) * fan_in];
            let mut acc = cur[0] * row[0];
            for i in 1..*fan_in {
                acc = acc + cur[i] * row[i];
            }
            acc = acc + b[r];
            if l + 1 < layers.len() {
                acc = acc.activate(spec.activation);
            }
            next.push(acc);
        }
        offset += fan_in * fan_out + fan_out;
        cur = next;
    }
    Ok(cur)
}

/// Records the net on a tape. `input` must have `input_dim` rows; the result
/// has `output_dim` rows and the same columns.
pub fn record_forward(tape: &mut Tape<'_>, spec: &NetSpec, input: NodeId) -> NodeId {
    let cols = tape.value(input).cols();
    record_forward_periodic(tape, spec, input, cols)
}

/// As [`record_forward`] for inputs whose values repeat every `period`
/// columns, see [`Tape::activate_periodic`].
pub fn record_forward_periodic(tape: &mut Tape<'_>, spec: &NetSpec, input: NodeId, period: usize) -> NodeId {
    let layers = spec.layers();
    let mut cur = input;
    let mut offset = 0;
    for (l, (fan_in, fan_out)) in layers.iter().enumerate() {
        cur = tape.dense(cur, offset, *fan_in, *fan_out);
        if l + 1 < layers.len() {
            cur = tape.activate_periodic(cur, spec.activation, period);
        }
        offset += fan_in * fan_out + fan_out;
    }
    cur
}
