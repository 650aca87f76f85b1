mod common;

use common::{random_net, rel_close, rng};
use pinn_core::fd::richardson;
use pinn_core::jet::{lift_constant, lift_seed, Jet};
use pinn_core::network::{forward, record_forward};
use pinn_core::tape::{JetArray, Tape};
use pinn_core::Activation;
use proptest::prelude::*;
use rand::Rng;

fn jets_at(x: &[f64], axis: usize, order: usize) -> Vec<Jet> {
    x.iter()
        .enumerate()
        .map(|(a, v)| {
            if a == axis {
                lift_seed(*v, order).unwrap()
            } else {
                lift_constant(*v, order).unwrap()
            }
        })
        .collect()
}

fn fd_step(order: usize) -> f64 {
    match order {
        1 => 1e-3,
        2 => 2e-3,
        _ => 1e-2,
    }
}

#[test]
fn jet_derivatives_match_finite_differences() {
    let mut r = rng(41);
    for act in Activation::ALL {
        for _ in 0..40 {
            let p = r.random_range(1..=4);
            let (spec, params) = random_net(&mut r, p, 1, act);
            let x: Vec<f64> = (0..p).map(|_| r.random_range(-1.0..1.0)).collect();
            for axis in 0..p {
                let jet = forward(&spec, &params, &jets_at(&x, axis, 3)).unwrap()[0];
                for k in 1..=3 {
                    let f = |s: f64| {
                        let mut y = x.clone();
                        y[axis] += s;
                        forward(&spec, &params, &y).unwrap()[0]
                    };
                    let fd = richardson(f, 0.0, k, fd_step(k)).unwrap();
                    assert!(
                        rel_close(jet.derivative(k), fd, 1e-5, 1e-7),
                        "{act} order {k}: jet {} fd {fd}",
                        jet.derivative(k)
                    );
                }
            }
        }
    }
}

#[test]
fn tape_forward_matches_scalar_jets() {
    let mut r = rng(5);
    for act in Activation::ALL {
        let (spec, params) = random_net(&mut r, 3, 2, act);
        let pts: Vec<Vec<f64>> = (0..7).map(|_| (0..3).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let mut input = JetArray::zeros(3, 3, pts.len());
        for (c, x) in pts.iter().enumerate() {
            for (a, j) in jets_at(x, 1, 3).iter().enumerate() {
                input.set_jet(a, c, j);
            }
        }
        let mut tape = Tape::new(&params);
        let x = tape.constant(input);
        let out = record_forward(&mut tape, &spec, x);
        for (c, x) in pts.iter().enumerate() {
            let want = forward(&spec, &params, &jets_at(x, 1, 3)).unwrap();
            for (q, w) in want.iter().enumerate() {
                let got = tape.value(out).jet(q, c);
                for (g, e) in got.coeffs().iter().zip(w.coeffs()) {
                    assert!(rel_close(*g, *e, 1e-12, 1e-14), "{g} vs {e}");
                }
            }
        }
    }
}

#[test]
fn replay_is_bitwise() {
    let mut r = rng(9);
    let (spec, params) = random_net(&mut r, 2, 1, Activation::Sigmoid);
    let mut input = JetArray::zeros(2, 2, 5);
    for c in 0..5 {
        for (a, j) in jets_at(&[0.1 * c as f64, -0.3], 0, 2).iter().enumerate() {
            input.set_jet(a, c, j);
        }
    }
    let mut tape = Tape::new(&params);
    let x = tape.constant(input);
    let out = record_forward(&mut tape, &spec, x);
    let y = tape.select(out, 0, 0, 5);
    let d2 = tape.coefficient(y, 2);
    let sq = tape.mul(d2, d2);
    let m = tape.mean(sq);
    let replayed = tape.replay();
    assert_eq!(replayed.len(), tape.len());
    for (i, v) in replayed.iter().enumerate() {
        let id = pinn_core::tape::NodeId::from_index(i);
        let a: Vec<u64> = tape.value(id).data().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = v.data().iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b, "node {i}");
    }
    assert!(tape.scalar(m).is_finite());
}

/// Plain reverse mode for an order-0 MLP, written independently.
fn manual_backprop(spec: &pinn_core::NetSpec, params: &[f64], x: &[f64]) -> Vec<f64> {
    // loss = 0.5 * y^2 with y the single output
    let layers = spec.layers();
    let mut acts = vec![x.to_vec()];
    let mut pre = Vec::new();
    let mut off = 0;
    for (l, (fi, fo)) in layers.iter().enumerate() {
        let w = &params[off..off + fi * fo];
        let b = &params[off + fi * fo..off + fi * fo + fo];
        let inp = acts.last().unwrap();
        let z: Vec<f64> = (0..*fo)
            .map(|r| (0..*fi).map(|i| w[r * fi + i] * inp[i]).sum::<f64>() + b[r])
            .collect();
        let a = if l + 1 < layers.len() {
            z.iter().map(|v| spec.activation.eval(*v)).collect()
        } else {
            z.clone()
        };
        pre.push(z);
        acts.push(a);
        off += fi * fo + fo;
    }
    let mut grad = vec![0.0; params.len()];
    let mut delta: Vec<f64> = acts.last().unwrap().clone();
    for l in (0..layers.len()).rev() {
        let (fi, fo) = layers[l];
        off -= fi * fo + fo;
        if l + 1 < layers.len() {
            for (d, z) in delta.iter_mut().zip(&pre[l]) {
                *d *= spec.activation.derivatives(*z)[1];
            }
        }
        let inp = &acts[l];
        for r in 0..fo {
            for i in 0..fi {
                grad[off + r * fi + i] += delta[r] * inp[i];
            }
            grad[off + fi * fo + r] += delta[r];
        }
        let w = &params[off..off + fi * fo];
        delta = (0..fi).map(|i| (0..fo).map(|r| w[r * fi + i] * delta[r]).sum()).collect();
    }
    grad
}

#[test]
fn order_zero_sweep_is_standard_backprop() {
    let mut r = rng(77);
    for act in Activation::ALL {
        for _ in 0..10 {
            let (spec, params) = random_net(&mut r, 2, 1, act);
            let x = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
            let mut tape = Tape::new(&params);
            let mut input = JetArray::zeros(0, 2, 1);
            input.set_coeff(0, 0, 0, x[0]);
            input.set_coeff(1, 0, 0, x[1]);
            let xi = tape.constant(input);
            let y = record_forward(&mut tape, &spec, xi);
            let sq = tape.mul(y, y);
            let loss = tape.scale(sq, 0.5);
            let g = tape.gradient(loss).unwrap();
            let want = manual_backprop(&spec, &params, &x);
            for (a, b) in g.iter().zip(&want) {
                assert!(rel_close(*a, *b, 1e-12, 1e-14), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn first_coefficient_loss_gradient_matches_differences() {
    // loss = (c1(net(x)) - 1)^2 for a one-hidden-unit net
    let spec = pinn_core::NetSpec::new(1, 1, 2, 1, Activation::Tanh).unwrap();
    let params = vec![0.8, 0.1, -1.3, 0.4];
    let loss = |p: &[f64]| -> (f64, Vec<f64>) {
        let mut tape = Tape::new(p);
        let x = tape.constant(JetArray::from_jets(1, &[lift_seed(0.3, 1).unwrap()]).unwrap());
        let y = record_forward(&mut tape, &spec, x);
        let d = tape.coefficient(y, 1);
        let d = tape.add_const(d, JetArray::constant_row(0, &[-1.0]));
        let sq = tape.mul(d, d);
        let g = tape.gradient(sq).unwrap();
        (tape.scalar(sq), g)
    };
    let (_, g) = loss(&params);
    for i in 0..params.len() {
        let f = |s: f64| {
            let mut p = params.clone();
            p[i] += s;
            loss(&p).0
        };
        let fd = pinn_core::fd::finite_diff(f, 0.0, 1, 1e-4).unwrap();
        assert!(rel_close(g[i], fd, 1e-6, 1e-9), "param {i}: {} vs {fd}", g[i]);
    }
}

proptest! {
    #[test]
    fn cubic_polynomials_are_exact(a in prop::array::uniform4(-3.0f64..3.0), x0 in -2.0f64..2.0) {
        let x = lift_seed(x0, 3).unwrap();
        let c = |v: f64| lift_constant(v, 3).unwrap();
        let p = c(a[0]) + c(a[1]) * x + c(a[2]) * x * x + c(a[3]) * x * x * x;
        let want = [
            a[0] + a[1] * x0 + a[2] * x0 * x0 + a[3] * x0 * x0 * x0,
            a[1] + 2.0 * a[2] * x0 + 3.0 * a[3] * x0 * x0,
            a[2] + 3.0 * a[3] * x0,
            a[3],
        ];
        for (g, w) in p.coeffs().iter().zip(want) {
            prop_assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn product_rule_holds(a in prop::array::uniform4(-2.0f64..2.0), b in prop::array::uniform4(-2.0f64..2.0)) {
        let ja = Jet::from_coeffs(&a).unwrap();
        let jb = Jet::from_coeffs(&b).unwrap();
        let p = ja * jb;
        let q = jb * ja;
        for (x, y) in p.coeffs().iter().zip(q.coeffs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        // derivative of order 1 follows Leibniz
        prop_assert!((p.derivative(1) - (ja.derivative(1) * b[0] + a[0] * jb.derivative(1))).abs() < 1e-12);
    }

    #[test]
    fn activations_commute_with_constants(c in -4.0f64..4.0, k in 0usize..=3) {
        for act in Activation::ALL {
            let j = lift_constant(c, k).unwrap().activate(act);
            prop_assert_eq!(j, lift_constant(act.eval(c), k).unwrap());
        }
    }
}
