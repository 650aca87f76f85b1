//! Numeric kinds that closed forms, blends and the network are generic over.

use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::activation::{self, Activation};
use crate::jet::Jet;

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn value(&self) -> f64;
    /// A constant of the same kind (same jet order).
    fn constant_like(&self, v: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn tanh(self) -> Self;
    fn recip(self) -> Self;
    fn activate(self, act: Activation) -> Self;

    /// `c - self`.
    fn rsub(self, c: f64) -> Self {
        -self + c
    }

    fn sqr(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn constant_like(&self, v: f64) -> f64 {
        v
    }
    fn sin(self) -> f64 {
        libm::sin(self)
    }
    fn cos(self) -> f64 {
        libm::cos(self)
    }
    fn exp(self) -> f64 {
        libm::exp(self)
    }
    fn ln(self) -> f64 {
        libm::log(self)
    }
    fn tanh(self) -> f64 {
        libm::tanh(self)
    }
    fn recip(self) -> f64 {
        1.0 / self
    }
    fn activate(self, act: Activation) -> f64 {
        match act {
            Activation::Sigmoid => activation::sigmoid(self),
            _ => act.eval(self),
        }
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn constant_like(&self, v: f64) -> Jet {
        Jet::constant_like(self, v)
    }
    fn sin(self) -> Jet {
        Jet::sin(self)
    }
    fn cos(self) -> Jet {
        Jet::cos(self)
    }
    fn exp(self) -> Jet {
        Jet::exp(self)
    }
    fn ln(self) -> Jet {
        Jet::ln(self)
    }
    fn tanh(self) -> Jet {
        Jet::tanh(self)
    }
    fn recip(self) -> Jet {
        Jet::recip(self)
    }
    fn activate(self, act: Activation) -> Jet {
        Jet::activate(self, act)
    }
}
