//! Activation functions with an explicit positive/negative decomposition.
//!
//! Every activation in the zoo can be written as `f(x) = p(x) + n(x)`, where the
//! positive part `p` is non-negative on `x > 0` and vanishes elsewhere, and the
//! negative part `n` is non-positive on `x <= 0`. The piece-wise kinds are
//! defined directly in that form (`max(phi(x), 0) + min(eta(x), 0)`); Swish is
//! split by restricting it to the two half-lines.
//!
//! Derivatives at the kink `x = 0` are right-hand derivatives. The left-hand
//! value is available through [`ActivationSpec::left_derivative`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Negative-domain slope of the classic leaky ReLU.
pub const LEAKY_RELU_SLOPE: f64 = 0.01;
/// SELU scale.
pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_5;
/// SELU negative-domain shape.
pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActivationKind {
    Relu,
    LeakyRelu,
    LStarRelu,
    Elu,
    Selu,
    Swish,
    PSwish,
    PRelu,
    TanhMix,
    Identity,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 10] = [
        ActivationKind::Relu,
        ActivationKind::LeakyRelu,
        ActivationKind::LStarRelu,
        ActivationKind::Elu,
        ActivationKind::Selu,
        ActivationKind::Swish,
        ActivationKind::PSwish,
        ActivationKind::PRelu,
        ActivationKind::TanhMix,
        ActivationKind::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::LeakyRelu => "lrelu",
            ActivationKind::LStarRelu => "lstar",
            ActivationKind::Elu => "elu",
            ActivationKind::Selu => "selu",
            ActivationKind::Swish => "swish",
            ActivationKind::PSwish => "pswish",
            ActivationKind::PRelu => "prelu",
            ActivationKind::TanhMix => "tanhmix",
            ActivationKind::Identity => "identity",
        }
    }

    /// True for kinds whose negative part is a ray through the origin.
    pub fn is_relu_family(self) -> bool {
        matches!(
            self,
            ActivationKind::Relu | ActivationKind::LeakyRelu | ActivationKind::LStarRelu | ActivationKind::PRelu
        )
    }

    /// Kinds with a kink at zero (everything except the smooth Swish variants and Identity).
    pub fn is_piecewise(self) -> bool {
        !matches!(
            self,
            ActivationKind::Swish | ActivationKind::PSwish | ActivationKind::Identity
        )
    }
}

/// An activation function together with its parameters.
///
/// `PRelu` and `PSwish` are the only trainable kinds; their field holds the
/// current (or initial) value of the trainable parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActivationSpec {
    Relu,
    LeakyRelu,
    LStarRelu { alpha: f64 },
    Elu,
    Selu,
    Swish { beta: f64 },
    PSwish { beta: f64 },
    PRelu { alpha: f64 },
    TanhMix { a: f64, b: f64 },
    Identity,
}

/// Builds an L*ReLU: identity on the positive domain, slope `alpha` on the negative one.
pub fn make_lstar_relu(alpha: f64) -> Result<ActivationSpec> {
    let spec = ActivationSpec::LStarRelu { alpha };
    spec.validate()?;
    Ok(spec)
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn sech2(z: f64) -> f64 {
    let c = z.cosh();
    1.0 / (c * c)
}

impl ActivationSpec {
    pub fn kind(&self) -> ActivationKind {
        match self {
            ActivationSpec::Relu => ActivationKind::Relu,
            ActivationSpec::LeakyRelu => ActivationKind::LeakyRelu,
            ActivationSpec::LStarRelu { .. } => ActivationKind::LStarRelu,
            ActivationSpec::Elu => ActivationKind::Elu,
            ActivationSpec::Selu => ActivationKind::Selu,
            ActivationSpec::Swish { .. } => ActivationKind::Swish,
            ActivationSpec::PSwish { .. } => ActivationKind::PSwish,
            ActivationSpec::PRelu { .. } => ActivationKind::PRelu,
            ActivationSpec::TanhMix { .. } => ActivationKind::TanhMix,
            ActivationSpec::Identity => ActivationKind::Identity,
        }
    }

    /// A representative instance of `kind` with default parameters.
    pub fn default_for(kind: ActivationKind) -> Self {
        match kind {
            ActivationKind::Relu => ActivationSpec::Relu,
            ActivationKind::LeakyRelu => ActivationSpec::LeakyRelu,
            ActivationKind::LStarRelu => ActivationSpec::LStarRelu { alpha: 0.25 },
            ActivationKind::Elu => ActivationSpec::Elu,
            ActivationKind::Selu => ActivationSpec::Selu,
            ActivationKind::Swish => ActivationSpec::Swish { beta: 1.0 },
            ActivationKind::PSwish => ActivationSpec::PSwish { beta: 1.0 },
            ActivationKind::PRelu => ActivationSpec::PRelu { alpha: 0.25 },
            ActivationKind::TanhMix => ActivationSpec::TanhMix { a: 0.1, b: 0.15 },
            ActivationKind::Identity => ActivationSpec::Identity,
        }
    }

    /// Named parameters, in descriptor order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ActivationSpec::LStarRelu { alpha } | ActivationSpec::PRelu { alpha } => {
                vec![("alpha", alpha)]
            }
            ActivationSpec::LeakyRelu => vec![("alpha", LEAKY_RELU_SLOPE)],
            ActivationSpec::Swish { beta } | ActivationSpec::PSwish { beta } => {
                vec![("beta", beta)]
            }
            ActivationSpec::Selu => vec![("lambda", SELU_LAMBDA), ("alpha_selu", SELU_ALPHA)],
            ActivationSpec::TanhMix { a, b } => vec![("a", a), ("b", b)],
            ActivationSpec::Relu | ActivationSpec::Elu | ActivationSpec::Identity => vec![],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.params() {
            if !value.is_finite() {
                return Err(Error::Domain(format!(
                    "{} parameter {name} is not finite ({value})",
                    self.kind().name()
                )));
            }
        }
        match *self {
            ActivationSpec::LStarRelu { alpha } | ActivationSpec::PRelu { alpha } if alpha < 0.0 => Err(
                Error::Parameter(format!("{} slope must be >= 0, got {alpha}", self.kind().name())),
            ),
            ActivationSpec::TanhMix { a, b } if a < 0.0 || b < 0.0 => Err(Error::Parameter(format!(
                "tanhmix coefficients must be >= 0, got a={a} b={b}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn is_trainable(&self) -> bool {
        matches!(self, ActivationSpec::PRelu { .. } | ActivationSpec::PSwish { .. })
    }

    pub fn trainable_param(&self) -> Option<f64> {
        match *self {
            ActivationSpec::PRelu { alpha } => Some(alpha),
            ActivationSpec::PSwish { beta } => Some(beta),
            _ => None,
        }
    }

    /// Returns a copy with the trainable parameter replaced. No-op for fixed kinds.
    pub fn with_trainable_param(&self, value: f64) -> Self {
        match *self {
            ActivationSpec::PRelu { .. } => ActivationSpec::PRelu { alpha: value },
            ActivationSpec::PSwish { .. } => ActivationSpec::PSwish { beta: value },
            other => other,
        }
    }

    /// Checked evaluation.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.apply(x))
    }

    /// Checked right-hand derivative.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.grad(x))
    }

    /// Checked left-hand derivative. Equal to [`Self::derivative`] away from zero.
    pub fn left_derivative(&self, x: f64) -> Result<f64> {
        self.check_input(x)?;
        Ok(if x == 0.0 {
            self.grad_left_of_zero()
        } else {
            self.grad(x)
        })
    }

    fn check_input(&self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("input {x} is not finite")));
        }
        self.validate()
    }

    /// Unchecked evaluation used on hot paths.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            ActivationSpec::Relu => x.max(0.0),
            ActivationSpec::LeakyRelu => x.max(0.0) + (LEAKY_RELU_SLOPE * x).min(0.0),
            ActivationSpec::LStarRelu { alpha } | ActivationSpec::PRelu { alpha } => x.max(0.0) + (alpha * x).min(0.0),
            ActivationSpec::Elu => x.max(0.0) + x.exp_m1().min(0.0),
            ActivationSpec::Selu => SELU_LAMBDA * (x.max(0.0) + (SELU_ALPHA * x.exp_m1()).min(0.0)),
            ActivationSpec::Swish { beta } | ActivationSpec::PSwish { beta } => x * sigmoid(beta * x),
            ActivationSpec::TanhMix { a, b } => x.max(0.0) + ((a * x).tanh() + b * x).min(0.0),
            ActivationSpec::Identity => x,
        }
    }

    /// Unchecked right-hand derivative.
    #[inline]
    pub fn grad(&self, x: f64) -> f64 {
        let positive = x >= 0.0;
        match *self {
            ActivationSpec::Relu => {
                if positive {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationSpec::LeakyRelu => {
                if positive {
                    1.0
                } else {
                    LEAKY_RELU_SLOPE
                }
            }
            ActivationSpec::LStarRelu { alpha } | ActivationSpec::PRelu { alpha } => {
                if positive {
                    1.0
                } else {
                    alpha
                }
            }
            ActivationSpec::Elu => {
                if positive {
                    1.0
                } else {
                    x.exp()
                }
            }
            ActivationSpec::Selu => {
                if positive {
                    SELU_LAMBDA
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp()
                }
            }
            ActivationSpec::Swish { beta } | ActivationSpec::PSwish { beta } => {
                let s = sigmoid(beta * x);
                s + beta * x * s * (1.0 - s)
            }
            ActivationSpec::TanhMix { a, b } => {
                if positive {
                    1.0
                } else {
                    a * sech2(a * x) + b
                }
            }
            ActivationSpec::Identity => 1.0,
        }
    }

    fn grad_left_of_zero(&self) -> f64 {
        match *self {
            ActivationSpec::Relu => 0.0,
            ActivationSpec::LeakyRelu => LEAKY_RELU_SLOPE,
            ActivationSpec::LStarRelu { alpha } | ActivationSpec::PRelu { alpha } => alpha,
            ActivationSpec::Elu => 1.0,
            ActivationSpec::Selu => SELU_LAMBDA * SELU_ALPHA,
            ActivationSpec::TanhMix { a, b } => a + b,
            ActivationSpec::Swish { .. } | ActivationSpec::PSwish { .. } | ActivationSpec::Identity => self.grad(0.0),
        }
    }

    /// Partial derivative of `f(x)` with respect to the trainable parameter.
    /// Zero for fixed kinds.
    #[inline]
    pub fn param_grad(&self, x: f64) -> f64 {
        match *self {
            ActivationSpec::PRelu { .. } => x.min(0.0),
            ActivationSpec::PSwish { beta } => {
                let s = sigmoid(beta * x);
                x * x * s * (1.0 - s)
            }
            _ => 0.0,
        }
    }

    pub fn piecewise_view(&self) -> PiecewiseView {
        PiecewiseView { spec: *self }
    }
}

/// The split `f(x) = p(x) + n(x)` of an activation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseView {
    spec: ActivationSpec,
}

impl PiecewiseView {
    pub fn spec(&self) -> &ActivationSpec {
        &self.spec
    }

    /// `p(x)`: zero for `x <= 0`.
    pub fn positive(&self, x: f64) -> f64 {
        match self.spec {
            ActivationSpec::Selu => SELU_LAMBDA * x.max(0.0),
            ActivationSpec::Swish { .. } | ActivationSpec::PSwish { .. } | ActivationSpec::Identity => {
                if x > 0.0 {
                    self.spec.apply(x)
                } else {
                    0.0
                }
            }
            _ => x.max(0.0),
        }
    }

    /// `n(x)`: zero for `x > 0`.
    pub fn negative(&self, x: f64) -> f64 {
        match self.spec {
            ActivationSpec::Relu => 0.0,
            ActivationSpec::LeakyRelu => (LEAKY_RELU_SLOPE * x).min(0.0),
            ActivationSpec::LStarRelu { alpha } | ActivationSpec::PRelu { alpha } => (alpha * x).min(0.0),
            ActivationSpec::Elu => x.exp_m1().min(0.0),
            ActivationSpec::Selu => SELU_LAMBDA * (SELU_ALPHA * x.exp_m1()).min(0.0),
            ActivationSpec::TanhMix { a, b } => ((a * x).tanh() + b * x).min(0.0),
            ActivationSpec::Swish { .. } | ActivationSpec::PSwish { .. } | ActivationSpec::Identity => {
                if x > 0.0 {
                    0.0
                } else {
                    self.spec.apply(x)
                }
            }
        }
    }

    pub fn reconstruct(&self, x: f64) -> f64 {
        self.positive(x) + self.negative(x)
    }
}

impl fmt::Display for ActivationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.kind().name();
        match *self {
            ActivationSpec::LStarRelu { alpha } | ActivationSpec::PRelu { alpha } => {
                write!(f, "{name}:{alpha}")
            }
            ActivationSpec::Swish { beta } | ActivationSpec::PSwish { beta } => {
                write!(f, "{name}:{beta}")
            }
            ActivationSpec::TanhMix { a, b } => write!(f, "{name}:{a}:{b}"),
            _ => f.write_str(name),
        }
    }
}

impl FromStr for ActivationSpec {
    type Err = Error;

    /// Parses descriptors such as `relu`, `lstar:0.25`, `swish:1` or `tanhmix:0.1:0.15`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let args = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parameter(format!("bad number {p:?} in activation {s:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;

        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "activation {name:?} takes {n} parameter(s), got {} in {s:?}",
                    args.len()
                )))
            }
        };
        let beta_or_one = || -> Result<f64> {
            match args.as_slice() {
                [] => Ok(1.0),
                [beta] => Ok(*beta),
                _ => Err(Error::Parameter(format!("too many parameters in {s:?}"))),
            }
        };

        let spec = match name.as_str() {
            "relu" => arity(0).map(|_| ActivationSpec::Relu)?,
            "lrelu" | "leaky_relu" => arity(0).map(|_| ActivationSpec::LeakyRelu)?,
            "lstar" => arity(1).map(|_| ActivationSpec::LStarRelu { alpha: args[0] })?,
            "elu" => arity(0).map(|_| ActivationSpec::Elu)?,
            "selu" => arity(0).map(|_| ActivationSpec::Selu)?,
            "swish" => ActivationSpec::Swish { beta: beta_or_one()? },
            "pswish" => ActivationSpec::PSwish { beta: beta_or_one()? },
            "prelu" => arity(1).map(|_| ActivationSpec::PRelu { alpha: args[0] })?,
            "tanhmix" => arity(2).map(|_| ActivationSpec::TanhMix { a: args[0], b: args[1] })?,
            "identity" | "linear" => arity(0).map(|_| ActivationSpec::Identity)?,
            other => return Err(Error::Parameter(format!("unknown activation {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for ActivationSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ActivationSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
