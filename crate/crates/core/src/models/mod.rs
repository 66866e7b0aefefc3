//! GRNN, VGRNN and SI-VGRNN: the recurrent models over snapshot sequences,
//! their Gaussian latent machinery, reconstruction loss and checkpoints.

mod checkpoint;
mod config;
mod gaussian;
mod model;
mod prepared;
mod recon;

pub use checkpoint::{checkpoint_from_str, checkpoint_to_string, load_checkpoint, save_checkpoint};
pub use config::{ModelConfig, ModelKind};
pub use gaussian::{
    kl_gaussian, kl_gaussian_var, log_density_var, reparam_sample, reparam_sample_var,
    standard_noise, GaussianParams, GaussianVars, LatentSample, LatentSource,
};
pub use model::{
    HiddenState, LossBreakdown, Model, SequenceLoss, SnapshotEmbedding, SnapshotLoss,
};
pub use prepared::{prepare_sequence, PreparedSnapshot};
pub use recon::{recon_loss, ReconTarget};
