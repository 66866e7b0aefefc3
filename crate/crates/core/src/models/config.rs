use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Deterministic graph recurrent baseline.
    Grnn,
    /// Gaussian latent per node with a recurrent prior.
    Vgrnn,
    /// VGRNN with a semi-implicit posterior.
    SiVgrnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Grnn, ModelKind::Vgrnn, ModelKind::SiVgrnn];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Grnn => "grnn",
            ModelKind::Vgrnn => "vgrnn",
            ModelKind::SiVgrnn => "si-vgrnn",
        }
    }

    pub fn is_variational(self) -> bool {
        self != ModelKind::Grnn
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "grnn" => Ok(ModelKind::Grnn),
            "vgrnn" => Ok(ModelKind::Vgrnn),
            "si-vgrnn" | "sivgrnn" | "sivi" => Ok(ModelKind::SiVgrnn),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

/// Architecture hyperparameters. Stored in checkpoints so a model can be
/// rebuilt with identical parameter shapes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Attribute width; the global node count when identity features are used.
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// Output width of the attribute and latent feature extractors.
    pub feature_dim: usize,
    pub encoder_dim: usize,
    pub prior_dim: usize,
    pub latent_dim: usize,
    /// Width of the noise injected at each semi-implicit layer.
    pub noise_dim: usize,
    pub stochastic_layers: usize,
    /// Noise draws averaged for the semi-implicit posterior mean at evaluation.
    pub eval_samples: usize,
    /// `false` replaces the learned prior with `N(0, I)`.
    pub recurrent_prior: bool,
    /// `false` feeds zeros instead of the hidden state into the encoder.
    pub encoder_uses_hidden: bool,
}

impl ModelConfig {
    pub fn new(kind: ModelKind, input_dim: usize) -> Self {
        Self {
            kind,
            input_dim,
            hidden_dim: 32,
            feature_dim: 32,
            encoder_dim: 32,
            prior_dim: 32,
            latent_dim: 16,
            noise_dim: 16,
            stochastic_layers: 1,
            eval_samples: 10,
            recurrent_prior: true,
            encoder_uses_hidden: true,
        }
    }

    /// The model with the recurrence cut out of the prior and the encoder.
    /// Each snapshot is then fitted by an independent static VGAE.
    pub fn static_vgae(input_dim: usize) -> Self {
        Self {
            recurrent_prior: false,
            encoder_uses_hidden: false,
            ..Self::new(ModelKind::Vgrnn, input_dim)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("input_dim", self.input_dim),
            ("hidden_dim", self.hidden_dim),
            ("feature_dim", self.feature_dim),
            ("encoder_dim", self.encoder_dim),
            ("prior_dim", self.prior_dim),
            ("latent_dim", self.latent_dim),
        ];
        if let Some((name, _)) = dims.iter().find(|(_, d)| *d == 0) {
            return Err(Error::InvalidConfig(format!("{name} must be positive")));
        }
        if self.kind == ModelKind::SiVgrnn {
            if self.stochastic_layers == 0 {
                return Err(Error::InvalidConfig(
                    "si-vgrnn needs at least one stochastic layer".into(),
                ));
            }
            if self.noise_dim == 0 || self.eval_samples == 0 {
                return Err(Error::InvalidConfig(
                    "noise_dim and eval_samples must be positive".into(),
                ));
            }
        }
        Ok(())
    }
}
