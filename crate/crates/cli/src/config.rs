//! Run configuration: defaults, a flat `key = value` file, then flag overrides.
//!
//! ```text
//! # comments start with '#'
//! model = vgrnn
//! epochs = 1500
//! lr = 0.01
//! highlight = 19, 40
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use vgrnn::graphdata::MigrationConfig;
use vgrnn::models::{ModelConfig, ModelKind};
use vgrnn::training::{AdamConfig, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Generate,
    Train,
    Evaluate,
    Stats,
    Embed,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Generate => "generate",
            Command::Train => "train",
            Command::Evaluate => "evaluate",
            Command::Stats => "stats",
            Command::Embed => "embed",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub dataset: Option<PathBuf>,
    pub model: ModelKind,
    /// First seed; run `i` uses `seed + i`.
    pub seed: u64,
    pub runs: usize,
    pub epochs: usize,
    pub lr: f64,
    pub patience: usize,
    pub grad_clip: f64,
    pub holdout: usize,
    pub out: PathBuf,
    pub workers: usize,

    pub hidden_dim: usize,
    pub feature_dim: usize,
    pub encoder_dim: usize,
    pub prior_dim: usize,
    pub latent_dim: usize,
    pub noise_dim: usize,
    pub stochastic_layers: usize,
    pub eval_samples: usize,

    pub generator: MigrationConfig,

    /// Explicit checkpoint for `embed`; defaults to the one `train` wrote for
    /// `seed`.
    pub checkpoint: Option<PathBuf>,
    /// Node ids drawn with 1-σ ellipses in the embedding plot. Empty means
    /// the migrating and control nodes from a generator manifest, if any.
    pub highlight: Vec<usize>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let model = ModelConfig::new(ModelKind::Vgrnn, 0);
        let train = TrainConfig::default();
        Self {
            command,
            dataset: None,
            model: ModelKind::Vgrnn,
            seed: 0,
            runs: 10,
            epochs: train.epochs,
            lr: train.adam.learning_rate,
            patience: train.patience,
            grad_clip: train.adam.grad_clip_norm,
            holdout: 3,
            out: PathBuf::from("out"),
            workers: 1,
            hidden_dim: model.hidden_dim,
            feature_dim: model.feature_dim,
            encoder_dim: model.encoder_dim,
            prior_dim: model.prior_dim,
            latent_dim: model.latent_dim,
            noise_dim: model.noise_dim,
            stochastic_layers: model.stochastic_layers,
            eval_samples: model.eval_samples,
            generator: MigrationConfig::default(),
            checkpoint: None,
            highlight: Vec::new(),
        }
    }

    /// Sets one option by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            value
                .parse()
                .map_err(|e| anyhow!("invalid value {value:?} for {key}: {e}"))
        }
        let g = &mut self.generator;
        match key {
            "dataset" => self.dataset = Some(PathBuf::from(value)),
            "model" => self.model = value.parse().map_err(|e| anyhow!("{e}"))?,
            "seed" => self.seed = num(key, value)?,
            "runs" => self.runs = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "lr" => self.lr = num(key, value)?,
            "patience" => self.patience = num(key, value)?,
            "grad_clip" => self.grad_clip = num(key, value)?,
            "holdout" => self.holdout = num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "workers" => self.workers = num(key, value)?,
            "hidden_dim" => self.hidden_dim = num(key, value)?,
            "feature_dim" => self.feature_dim = num(key, value)?,
            "encoder_dim" => self.encoder_dim = num(key, value)?,
            "prior_dim" => self.prior_dim = num(key, value)?,
            "latent_dim" => self.latent_dim = num(key, value)?,
            "noise_dim" => self.noise_dim = num(key, value)?,
            "stochastic_layers" => self.stochastic_layers = num(key, value)?,
            "eval_samples" => self.eval_samples = num(key, value)?,
            "communities" => g.communities = num(key, value)?,
            "nodes_per_community" => g.nodes_per_community = num(key, value)?,
            "p_in" => g.p_in = num(key, value)?,
            "p_out" => g.p_out = num(key, value)?,
            "steps" => g.steps = num(key, value)?,
            "churn" => g.churn = num(key, value)?,
            "migrating_node" => g.migrating_node = Some(num(key, value)?),
            "checkpoint" => self.checkpoint = Some(PathBuf::from(value)),
            "highlight" => {
                self.highlight = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| num(key, s))
                    .collect::<Result<_>>()?
            }
            _ => bail!("unknown config key {key:?}"),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            self.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        self.apply_text(&text)
            .with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.command != Command::Generate && self.dataset.is_none() {
            bail!("`{}` needs a dataset (--dataset or `dataset = ...`)", self.command);
        }
        if matches!(self.command, Command::Train | Command::Evaluate) && self.runs == 0 {
            bail!("runs must be at least 1");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        self.train_config(self.seed)?.validate()?;
        Ok(())
    }

    pub fn dataset(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .ok_or_else(|| anyhow!("no dataset configured"))
    }

    /// Short dataset label used in result tables: the file stem.
    pub fn dataset_name(&self) -> String {
        self.dataset
            .as_deref()
            .and_then(Path::file_stem)
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.runs as u64).map(|i| self.seed + i).collect()
    }

    pub fn model_config(&self, input_dim: usize) -> ModelConfig {
        ModelConfig {
            hidden_dim: self.hidden_dim,
            feature_dim: self.feature_dim,
            encoder_dim: self.encoder_dim,
            prior_dim: self.prior_dim,
            latent_dim: self.latent_dim,
            noise_dim: self.noise_dim,
            stochastic_layers: self.stochastic_layers,
            eval_samples: self.eval_samples,
            ..ModelConfig::new(self.model, input_dim)
        }
    }

    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        Ok(TrainConfig {
            epochs: self.epochs,
            adam: AdamConfig {
                learning_rate: self.lr,
                grad_clip_norm: self.grad_clip,
                ..AdamConfig::default()
            },
            patience: self.patience,
            seed,
        })
    }

    /// Directory holding everything `train` writes for the configured model.
    pub fn model_dir(&self) -> PathBuf {
        self.out.join(self.model.as_str())
    }

    pub fn run_dir(&self, seed: u64) -> PathBuf {
        self.model_dir().join(format!("seed_{seed}"))
    }

    pub fn checkpoint_path(&self, seed: u64) -> PathBuf {
        self.run_dir(seed).join("checkpoint.json")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_experimental_setup() {
        let c = RunConfig::new(Command::Train);
        assert_eq!((c.runs, c.epochs, c.holdout, c.patience), (10, 1500, 3, 100));
        assert_eq!(c.lr, 0.01);
        assert_eq!((c.hidden_dim, c.latent_dim), (32, 16));
    }

    #[test]
    fn file_values_and_comments() {
        let mut c = RunConfig::new(Command::Embed);
        c.apply_text("# header\nmodel = si-vgrnn\nlatent_dim=2  # small\nhighlight = 19, 40\n\np_out = 0.02\n")
            .unwrap();
        assert_eq!(c.model, ModelKind::SiVgrnn);
        assert_eq!(c.latent_dim, 2);
        assert_eq!(c.highlight, vec![19, 40]);
        assert_eq!(c.generator.p_out, 0.02);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut c = RunConfig::new(Command::Train);
        assert!(c.apply_text("epoch = 3").is_err());
        assert!(c.apply_text("epochs = three").is_err());
        assert!(c.apply_text("epochs").is_err());
        assert!(c.apply_text("model = gcn").is_err());
    }

    #[test]
    fn commands_need_a_dataset() {
        let mut c = RunConfig::new(Command::Stats);
        assert!(c.validate().is_err());
        c.dataset = Some("g.txt".into());
        c.validate().unwrap();
        assert_eq!(c.dataset_name(), "g");
        RunConfig::new(Command::Generate).validate().unwrap();
    }
}
