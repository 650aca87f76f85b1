use core::fmt;
use core::str::FromStr;

use crate::error::Error;

/// Pointwise nonlinearity applied between affine maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Activation {
    Sigmoid,
    Tanh,
    Sin,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Sigmoid, Activation::Tanh, Activation::Sin];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Sin => "sin",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => libm::tanh(x),
            Activation::Sin => libm::sin(x),
        }
    }

    /// `[f, f', f'', f''', f'''']` at `x`.
    pub fn derivatives(self, x: f64) -> [f64; 5] {
        match self {
            Activation::Sigmoid => {
                let s = sigmoid(x);
                let d = s * (1.0 - s);
                let a = 1.0 - 2.0 * s;
                [
                    s,
                    d,
                    d * a,
                    d * (1.0 - 6.0 * s + 6.0 * s * s),
                    d * a * (1.0 - 12.0 * s + 12.0 * s * s),
                ]
            }
            Activation::Tanh => {
                let t = libm::tanh(x);
                let s = 1.0 - t * t;
                [
                    t,
                    s,
                    -2.0 * t * s,
                    s * (6.0 * t * t - 2.0),
                    8.0 * t * s * (2.0 - 3.0 * t * t),
                ]
            }
            Activation::Sin => {
                let (s, c) = (libm::sin(x), libm::cos(x));
                [s, c, -s, -c, s]
            }
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            "sin" => Ok(Activation::Sin),
            other => Err(Error::UnsupportedActivation(other.into())),
        }
    }
}
