//! Full-batch optimisation of the sequence objective with Adam, gradient
//! clipping and validation-AUC early stopping.

mod adam;
mod trainer;

pub use adam::{adam_step, clip_grad_norm, grad_norm, AdamConfig, AdamState};
pub use trainer::{train, EpochLog, TrainConfig, TrainReport};
