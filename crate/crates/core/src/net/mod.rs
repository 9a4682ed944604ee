//! Dense feed-forward classifier with reverse-mode gradients and Adam.

mod adam;
mod matrix;
mod network;
mod train;

pub use adam::{adam_step, AdamState};
pub use matrix::Matrix;
pub use network::{
    gradient_check, softmax, softmax_cross_entropy, Architecture, Checkpoint, CheckpointLayer, DenseLayer, Gradients,
    LayerGradients, LayerSpec, Network,
};
pub use train::{accuracy, fit, train, TrainConfig, TrainResult};
