use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use crate::autodiff::{Tape, Tensor};
use crate::error::{Error, Result};
use crate::evaluation::validation_metrics;
use crate::graphdata::{DynamicGraph, SplitSpec};
use crate::models::{prepare_sequence, LossBreakdown, Model};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub adam: AdamConfig,
    /// Epochs without a validation AUC improvement before stopping.
    pub patience: usize,
    /// Seeds the reparameterisation noise.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1500,
            adam: AdamConfig::default(),
            patience: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.patience == 0 {
            return Err(Error::InvalidConfig("patience must be at least 1".into()));
        }
        self.adam.validate()
    }
}

/// One row of the training log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub recon: f64,
    pub kl: f64,
    pub total: f64,
    pub val_auc: Option<f64>,
    pub val_ap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub history: Vec<EpochLog>,
    /// Per-snapshot losses of every epoch, before that epoch's update.
    pub losses: Vec<LossBreakdown>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_auc: Option<f64>,
    pub stopped_early: bool,
    pub wall_clock_secs: f64,
}

/// Fits `model` on the training adjacency of `split` over the snapshots
/// before the split's holdout. Validation AUC on those snapshots' validation
/// edges is measured after every update and the best parameters are kept.
/// `on_epoch` sees each log row together with the freshly updated model.
pub fn train(
    model: &mut Model,
    dg: &DynamicGraph,
    split: &SplitSpec,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog, &Model) -> Result<()>,
) -> Result<TrainReport> {
    cfg.validate()?;
    let start = Instant::now();
    let cut = dg.len().saturating_sub(split.holdout_snapshots.len());
    if cut == 0 {
        return Err(Error::InvalidConfig("no snapshots left for training".into()));
    }
    let train_graph = split.training_graph(dg)?;
    let mut seq = prepare_sequence(&train_graph, model.config().input_dim)?;
    seq.truncate(cut);
    let val_splits = &split.snapshots[..cut];
    let num_nodes = dg.num_nodes();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState::new(model.params());
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Vec<Tensor>)> = None;
    let mut stopped_early = false;

    for epoch in 1..=cfg.epochs {
        let mut tape = Tape::new();
        let bound = model.params().bind(&mut tape);
        let loss = model.sequence_loss(&mut tape, &bound, &seq, num_nodes, &mut rng)?;
        let breakdown = loss.breakdown(&tape);
        if !breakdown.total.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        let grads = tape.backward(loss.total)?;
        let params = model.params_mut();
        params.zero_grads();
        params.accumulate(&grads);
        adam_step(params, &mut adam, &cfg.adam)?;

        let val = validation_metrics(model, &seq, val_splits, num_nodes)?;
        let log = EpochLog {
            epoch,
            recon: breakdown.recon,
            kl: breakdown.kl,
            total: breakdown.total,
            val_auc: val.map(|v| v.0),
            val_ap: val.map(|v| v.1),
        };
        history.push(log);
        losses.push(breakdown);
        on_epoch(&log, model)?;

        if let Some(auc) = log.val_auc {
            if best.as_ref().is_none_or(|(b, _, _)| auc > *b) {
                let snapshot = model.params().ids().map(|id| model.params().value(id).clone()).collect();
                best = Some((auc, epoch, snapshot));
            }
        }
        if let Some((_, best_epoch, _)) = &best {
            if epoch - best_epoch >= cfg.patience {
                stopped_early = epoch < cfg.epochs;
                break;
            }
        }
    }

    let (best_epoch, best_val_auc) = match best {
        Some((auc, epoch, values)) => {
            let ids: Vec<_> = model.params().ids().collect();
            for (id, v) in ids.into_iter().zip(values) {
                *model.params_mut().value_mut(id) = v;
            }
            (epoch, Some(auc))
        }
        None => (history.len(), None),
    };
    model.set_trained(true);
    Ok(TrainReport {
        history,
        losses,
        best_epoch,
        best_val_auc,
        stopped_early,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}
