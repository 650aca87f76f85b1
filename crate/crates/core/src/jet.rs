//! Truncated univariate Taylor jets.
//!
//! A jet of order `K` stores `c_k = (1/k!) d^k/ds^k v(x + s e)` for one seed
//! direction `e`. Arithmetic is the truncated power-series arithmetic, and a
//! univariate function is applied by recomposition with its derivative table.

use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::activation::Activation;
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 3;

const FACTORIAL: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; MAX_ORDER + 1],
    order: u8,
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        Err(Error::InvalidOrder(order))
    } else {
        Ok(())
    }
}

/// Seed coordinate: value `x`, unit first coefficient.
pub fn lift_seed(x: f64, order: usize) -> Result<Jet> {
    check_order(order)?;
    let mut c = [0.0; MAX_ORDER + 1];
    c[0] = x;
    if order >= 1 {
        c[1] = 1.0;
    }
    Ok(Jet { c, order: order as u8 })
}

pub fn lift_constant(x: f64, order: usize) -> Result<Jet> {
    check_order(order)?;
    let mut c = [0.0; MAX_ORDER + 1];
    c[0] = x;
    Ok(Jet { c, order: order as u8 })
}

impl Jet {
    pub fn from_coeffs(coeffs: &[f64]) -> Result<Jet> {
        if coeffs.is_empty() {
            return Err(Error::InvalidOrder(0));
        }
        check_order(coeffs.len() - 1)?;
        let mut c = [0.0; MAX_ORDER + 1];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Jet {
            c,
            order: (coeffs.len() - 1) as u8,
        })
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..=self.order()]
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `k`-th derivative along the seed direction, `k! c_k`.
    pub fn derivative(&self, k: usize) -> f64 {
        if k > self.order() {
            0.0
        } else {
            FACTORIAL[k] * self.c[k]
        }
    }

    pub fn constant_like(&self, v: f64) -> Jet {
        let mut c = [0.0; MAX_ORDER + 1];
        c[0] = v;
        Jet { c, order: self.order }
    }

    fn same_order(&self, o: &Jet) -> Result<usize> {
        if self.order != o.order {
            Err(Error::OrderMismatch(self.order(), o.order()))
        } else {
            Ok(self.order())
        }
    }

    pub fn try_add(self, o: Jet) -> Result<Jet> {
        let k = self.same_order(&o)?;
        let mut c = [0.0; MAX_ORDER + 1];
        for i in 0..=k {
            c[i] = self.c[i] + o.c[i];
        }
        Ok(Jet { c, order: self.order })
    }

    pub fn try_sub(self, o: Jet) -> Result<Jet> {
        let k = self.same_order(&o)?;
        let mut c = [0.0; MAX_ORDER + 1];
        for i in 0..=k {
            c[i] = self.c[i] - o.c[i];
        }
        Ok(Jet { c, order: self.order })
    }

    /// Cauchy product truncated at the common order.
    pub fn try_mul(self, o: Jet) -> Result<Jet> {
        let k = self.same_order(&o)?;
        let mut c = [0.0; MAX_ORDER + 1];
        for n in 0..=k {
            let mut s = self.c[0] * o.c[n];
            for i in 1..=n {
                s += self.c[i] * o.c[n - i];
            }
            c[n] = s;
        }
        Ok(Jet { c, order: self.order })
    }

    pub fn try_div(self, o: Jet) -> Result<Jet> {
        let k = self.same_order(&o)?;
        let mut c = [0.0; MAX_ORDER + 1];
        c[0] = self.c[0] / o.c[0];
        for n in 1..=k {
            let mut s = self.c[n];
            for j in 1..=n {
                s -= o.c[j] * c[n - j];
            }
            c[n] = s / o.c[0];
        }
        Ok(Jet { c, order: self.order })
    }

    /// Applies a univariate function given its derivatives `d[0..=3]` at `c_0`.
    pub fn compose(self, d: &[f64]) -> Jet {
        let a = &self.c;
        let mut c = [0.0; MAX_ORDER + 1];
        c[0] = d[0];
        let k = self.order();
        if k >= 1 {
            c[1] = d[1] * a[1];
        }
        if k >= 2 {
            c[2] = d[1] * a[2] + 0.5 * d[2] * a[1] * a[1];
        }
        if k >= 3 {
            c[3] = d[1] * a[3] + d[2] * a[1] * a[2] + d[3] / 6.0 * a[1] * a[1] * a[1];
        }
        Jet { c, order: self.order }
    }

    pub fn activate(self, act: Activation) -> Jet {
        self.compose(&act.derivatives(self.c[0]))
    }

    pub fn sin(self) -> Jet {
        let (s, c) = (libm::sin(self.c[0]), libm::cos(self.c[0]));
        self.compose(&[s, c, -s, -c])
    }

    pub fn cos(self) -> Jet {
        let (s, c) = (libm::sin(self.c[0]), libm::cos(self.c[0]));
        self.compose(&[c, -s, -c, s])
    }

    pub fn exp(self) -> Jet {
        let e = libm::exp(self.c[0]);
        self.compose(&[e, e, e, e])
    }

    pub fn ln(self) -> Jet {
        let a = self.c[0];
        let r = 1.0 / a;
        self.compose(&[libm::log(a), r, -r * r, 2.0 * r * r * r])
    }

    pub fn tanh(self) -> Jet {
        self.activate(Activation::Tanh)
    }

    pub fn sigmoid(self) -> Jet {
        self.activate(Activation::Sigmoid)
    }

    pub fn recip(self) -> Jet {
        let r = 1.0 / self.c[0];
        self.compose(&[r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Jet").field(&self.coeffs()).finish()
    }
}

// Operator forms panic on order mismatch; use the `try_` methods to recover.
macro_rules! jet_binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait for Jet {
            type Output = Jet;
            fn $method(self, o: Jet) -> Jet {
                match self.$try(o) {
                    Ok(j) => j,
                    Err(e) => panic!("{e}"),
                }
            }
        }
    };
}

jet_binop!(Add, add, try_add);
jet_binop!(Sub, sub, try_sub);
jet_binop!(Mul, mul, try_mul);
jet_binop!(Div, div, try_div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        let mut c = self.c;
        for v in c.iter_mut() {
            *v = -*v;
        }
        Jet { c, order: self.order }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, s: f64) -> Jet {
        self.c[0] += s;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, s: f64) -> Jet {
        self.c[0] -= s;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, s: f64) -> Jet {
        for v in self.c.iter_mut() {
            *v *= s;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(mut self, s: f64) -> Jet {
        for v in self.c.iter_mut() {
            *v /= s;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn seeds_and_constants() {
        assert_eq!(lift_seed(2.0, 2).unwrap().coeffs(), &[2.0, 1.0, 0.0]);
        assert_eq!(lift_seed(0.0, 0).unwrap().coeffs(), &[0.0]);
        assert_eq!(lift_seed(0.5, 3).unwrap().coeffs(), &[0.5, 1.0, 0.0, 0.0]);
        assert_eq!(lift_seed(1.0, 4), Err(Error::InvalidOrder(4)));
        assert_eq!(lift_constant(7.0, 3).unwrap().coeffs(), &[7.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn products() {
        let x = lift_seed(3.0, 2).unwrap();
        assert_eq!((x * x).coeffs(), &[9.0, 6.0, 1.0]);
        let one = lift_constant(1.0, 2).unwrap();
        assert_eq!(x * one, x);
        let y = lift_seed(1.0, 3).unwrap();
        assert_eq!((y * y * y).coeffs(), &[1.0, 3.0, 3.0, 1.0]);
        let z = lift_seed(1.0, 1).unwrap();
        assert_eq!(x.try_mul(z), Err(Error::OrderMismatch(2, 1)));
    }

    #[test]
    fn activations_on_seeds() {
        let s = lift_seed(0.0, 3).unwrap().activate(Activation::Sin);
        assert_relative_eq!(s.coeffs()[0], 0.0);
        assert_relative_eq!(s.coeffs()[1], 1.0);
        assert_relative_eq!(s.coeffs()[2], 0.0);
        assert_relative_eq!(s.coeffs()[3], -1.0 / 6.0, epsilon = 1e-15);
        let g = lift_seed(0.0, 1).unwrap().activate(Activation::Sigmoid);
        assert_eq!(g.coeffs(), &[0.5, 0.25]);
        let c = lift_constant(0.7, 3).unwrap().activate(Activation::Tanh);
        assert_eq!(c, lift_constant(libm::tanh(0.7), 3).unwrap());
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Jet::from_coeffs(&[1.5, -0.3, 0.7, 0.2]).unwrap();
        let b = Jet::from_coeffs(&[2.0, 0.4, -1.1, 0.9]).unwrap();
        let q = (a * b) / b;
        for (x, y) in q.coeffs().iter().zip(a.coeffs()) {
            assert_relative_eq!(x, y, epsilon = 1e-14);
        }
        let r = b.recip() * b;
        assert_relative_eq!(r.coeffs()[0], 1.0, epsilon = 1e-15);
        for v in &r.coeffs()[1..] {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn exp_ln_roundtrip() {
        let a = Jet::from_coeffs(&[0.8, 0.5, -0.25, 0.125]).unwrap();
        let b = a.exp().ln();
        for (x, y) in b.coeffs().iter().zip(a.coeffs()) {
            assert_relative_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn derivative_scales_by_factorial() {
        let x = lift_seed(2.0, 3).unwrap();
        let c = x * x * x;
        assert_eq!(c.derivative(0), 8.0);
        assert_eq!(c.derivative(1), 12.0);
        assert_eq!(c.derivative(2), 12.0);
        assert_eq!(c.derivative(3), 6.0);
    }
}
