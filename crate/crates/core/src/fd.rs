//! Central finite differences, used as an independent derivative oracle.

use alloc::vec::Vec;

use crate::error::{contract, Error, Result};
use crate::pde::{BundleShape, DerivativeBundle, PdeProblem};

/// Second-order central estimate of the `order`-th derivative of `f` at `x`.
pub fn finite_diff<F: Fn(f64) -> f64>(f: F, x: f64, order: usize, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(contract("finite-difference step must be positive"));
    }
    Ok(match order {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        3 => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
        other => return Err(Error::InvalidOrder(other)),
    })
}

/// One Richardson step on top of [`finite_diff`]: fourth-order accurate.
pub fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, order: usize, h: f64) -> Result<f64> {
    let coarse = finite_diff(&f, x, order, h)?;
    let fine = finite_diff(&f, x, order, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Per-axis steps for differencing the benchmark solutions: `h` scaled down
/// where a solution varies fast (narrow viscous fronts, fast soliton time
/// scales of order `k_max^3`).
pub fn characteristic_steps(problem: &PdeProblem, h: f64) -> Vec<f64> {
    use crate::pde::ProblemKind;
    let dim = problem.input_dim();
    let mut steps = alloc::vec![h; dim];
    match *problem.kind() {
        ProblemKind::Burgers1Viscid { nu, .. } => {
            let s = (20.0 * nu).min(1.0);
            steps.iter_mut().for_each(|v| *v *= s);
        }
        ProblemKind::Kdv { solitons, .. } => {
            let k_max: f64 = match solitons {
                1 => 2.0,
                2 => 4.0,
                _ => 6.0,
            };
            let s = 2.0 / k_max;
            steps[1] *= s * s * s;
        }
        _ => {}
    }
    steps
}

/// Derivative bundle of `f` at `point` by Richardson-extrapolated central
/// differences, with step `steps[axis]` per input axis.
pub fn fd_bundle<F>(problem: &PdeProblem, shape: &BundleShape, point: &[f64], steps: &[f64], f: F) -> Result<DerivativeBundle<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if steps.len() != point.len() {
        return Err(Error::Shape {
            expected: point.len(),
            found: steps.len(),
        });
    }
    let base = f(point);
    let d = |axis: usize, c: usize, k: usize| -> f64 {
        let along = |s: f64| {
            let mut q = point.to_vec();
            q[axis] += s;
            f(&q)[c]
        };
        richardson(along, 0.0, k, steps[axis]).unwrap_or(f64::NAN)
    };
    problem.assemble(shape, point, |c| base[c], d)
}
