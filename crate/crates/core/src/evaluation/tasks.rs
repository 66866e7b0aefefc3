use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{auc, average_precision, ScoredPairs};
use crate::autodiff::{sigmoid, Tensor};
use crate::error::{Error, Result};
use crate::graphdata::{new_edges, sample_nonedges, DynamicGraph, Edge, SnapshotSplit, SplitSpec};
use crate::models::{prepare_sequence, Model, PreparedSnapshot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Detection,
    Prediction,
    NewPrediction,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Detection, Task::Prediction, Task::NewPrediction];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Detection => "detection",
            Task::Prediction => "prediction",
            Task::NewPrediction => "new_prediction",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown task `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotScore {
    pub snapshot: usize,
    pub auc: f64,
    pub ap: f64,
}

/// Scores of one task over its evaluation snapshots. An empty result means
/// the task had no true edges to score anywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub task: Task,
    pub snapshots: Vec<SnapshotScore>,
}

impl TaskResult {
    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn mean_auc(&self) -> Option<f64> {
        mean(self.snapshots.iter().map(|s| s.auc))
    }

    pub fn mean_ap(&self) -> Option<f64> {
        mean(self.snapshots.iter().map(|s| s.ap))
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> Option<f64> {
    let n = values.len();
    (n > 0).then(|| values.sum::<f64>() / n as f64)
}

/// Inner-product edge probability from per-node embedding rows.
pub struct EmbeddingScorer<'a> {
    index: HashMap<usize, usize>,
    embedding: &'a Tensor,
}

impl<'a> EmbeddingScorer<'a> {
    pub fn new(node_ids: &[usize], embedding: &'a Tensor) -> Self {
        Self {
            index: node_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect(),
            embedding,
        }
    }

    pub fn score(&self, u: usize, v: usize) -> Result<f64> {
        let row = |id: usize| {
            self.index
                .get(&id)
                .map(|&i| self.embedding.row(i))
                .ok_or_else(|| Error::InvalidGraph(format!("node {id} not in snapshot")))
        };
        let (a, b) = (row(u)?, row(v)?);
        Ok(sigmoid(a.iter().zip(b).map(|(x, y)| x * y).sum()))
    }

    pub fn score_pairs(&self, positives: &[Edge], negatives: &[Edge]) -> Result<ScoredPairs> {
        let mut failure = None;
        let sp = ScoredPairs::from_edges(positives, negatives, |u, v| {
            self.score(u, v).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                0.0
            })
        })?;
        match failure {
            Some(e) => Err(e),
            None => Ok(sp),
        }
    }
}

fn score(snapshot: usize, sp: &ScoredPairs) -> Result<SnapshotScore> {
    Ok(SnapshotScore {
        snapshot,
        auc: auc(sp)?,
        ap: average_precision(sp)?,
    })
}

/// Mean validation AUC and AP over `seq`, using the validation edges of the
/// matching `splits`. Returns `None` when no snapshot has validation edges.
pub fn validation_metrics(
    model: &Model,
    seq: &[PreparedSnapshot],
    splits: &[SnapshotSplit],
    num_nodes: usize,
) -> Result<Option<(f64, f64)>> {
    let (embs, _) = model.embed_sequence(seq, model.initial_state(num_nodes))?;
    let mut scores = Vec::new();
    for (t, (emb, split)) in embs.iter().zip(splits).enumerate() {
        if split.val_edges.is_empty() || split.val_nonedges.is_empty() {
            continue;
        }
        let scorer = EmbeddingScorer::new(&emb.node_ids, &emb.mean);
        scores.push(score(t, &scorer.score_pairs(&split.val_edges, &split.val_nonedges)?)?);
    }
    let n = scores.len();
    Ok((n > 0).then(|| {
        let a = scores.iter().map(|s| s.auc).sum::<f64>() / n as f64;
        let p = scores.iter().map(|s| s.ap).sum::<f64>() / n as f64;
        (a, p)
    }))
}

/// Link detection: held-out test edges of each evaluation snapshot against
/// the split's sampled non-edges, scored with posterior-mean embeddings. The
/// evaluation snapshots are the split's holdout snapshots, or all of them
/// when there is no holdout. Inference only ever sees the training adjacency.
pub fn run_detection(model: &Model, dg: &DynamicGraph, split: &SplitSpec) -> Result<TaskResult> {
    if !model.is_trained() {
        return Err(Error::Untrained);
    }
    let train_graph = split.training_graph(dg)?;
    let seq = prepare_sequence(&train_graph, model.config().input_dim)?;
    let (embs, _) = model.embed_sequence(&seq, model.initial_state(dg.num_nodes()))?;
    let targets: Vec<usize> = if split.holdout_snapshots.is_empty() {
        (0..dg.len()).collect()
    } else {
        split.holdout_snapshots.clone()
    };
    let mut snapshots = Vec::with_capacity(targets.len());
    for t in targets {
        let sp = &split.snapshots[t];
        let emb = &embs[t];
        let scorer = EmbeddingScorer::new(&emb.node_ids, &emb.mean);
        snapshots.push(score(t, &scorer.score_pairs(&sp.test_edges, &sp.test_nonedges)?)?);
    }
    Ok(TaskResult {
        task: Task::Detection,
        snapshots,
    })
}

/// Next-step prediction over the last `holdout` snapshots. Each step is
/// scored from the state after the preceding observed snapshot; the step is
/// then consumed to roll the state forward. Positives are all edges of the
/// step (or only those absent from the previous step when `new_only`),
/// against as many non-edges sampled with `seed`. Steps with no positives
/// are skipped.
pub fn run_prediction(
    model: &Model,
    dg: &DynamicGraph,
    holdout: usize,
    new_only: bool,
    seed: u64,
) -> Result<TaskResult> {
    if holdout == 0 {
        return Err(Error::InvalidConfig("prediction needs at least one holdout snapshot".into()));
    }
    if holdout >= dg.len() {
        return Err(Error::InvalidConfig(format!(
            "holdout {holdout} must be smaller than the number of snapshots {}",
            dg.len()
        )));
    }
    if !model.is_trained() {
        return Err(Error::Untrained);
    }
    let seq = prepare_sequence(dg, model.config().input_dim)?;
    let cut = dg.len() - holdout;
    let (_, mut state) = model.embed_sequence(&seq[..cut], model.initial_state(dg.num_nodes()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut snapshots = Vec::new();
    for t in cut..dg.len() {
        let (prev, next) = (dg.snapshot(t - 1), dg.snapshot(t));
        let (positives, exclude): (Vec<Edge>, BTreeSet<Edge>) = if new_only {
            (new_edges(prev, next), prev.edge_set().clone())
        } else {
            (next.edges().collect(), BTreeSet::new())
        };
        if !positives.is_empty() {
            let negatives = sample_nonedges(next, positives.len(), &exclude, &mut rng)?;
            let emb = model.forecast_embedding(&state, next.node_ids())?;
            let scorer = EmbeddingScorer::new(next.node_ids(), &emb);
            snapshots.push(score(t, &scorer.score_pairs(&positives, &negatives)?)?);
        }
        state = model.infer_step(&state, &seq[t])?.1;
    }
    Ok(TaskResult {
        task: if new_only {
            Task::NewPrediction
        } else {
            Task::Prediction
        },
        snapshots,
    })
}
