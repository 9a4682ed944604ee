//! Piece-wise linear activations with Lipschitz-chosen negative slopes (L*ReLU),
//! Lipschitz estimators, a from-scratch MLP, and the experiment harness that
//! compares them.
//!
//! Modules:
//! - [`afzoo`]: activation functions and their positive/negative decomposition
//! - [`lipschitz`]: sup-derivative and secant estimators, class separation
//! - [`net`]: dense network, softmax cross-entropy, Adam, training loop
//! - [`data`]: two-moons and fine-grained generators, CIFAR-10 batches, CSV
//! - [`harness`]: slope sweeps, matched-Lipschitz runs, initialisation sensitivity

pub mod afzoo;
pub mod data;
mod error;
pub mod fmt;
pub mod harness;
pub mod lipschitz;
pub mod net;

pub use afzoo::{make_lstar_relu, ActivationKind, ActivationSpec, PiecewiseView};
pub use data::{Dataset, DatasetSpec};
pub use error::{Error, Result};
pub use lipschitz::{class_separation, estimate_secant, estimate_sup_derivative, Interval, LipschitzEstimate};
pub use net::{Architecture, Matrix, Network, TrainConfig, TrainResult};
