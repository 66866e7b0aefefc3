//! AUC / AP metrics and the link detection and (new) link prediction
//! protocols.

mod metrics;
mod summary;
mod tasks;

pub use metrics::{auc, average_precision, ScoredPair, ScoredPairs};
pub use summary::MeanStdErr;
pub use tasks::{
    run_detection, run_prediction, validation_metrics, EmbeddingScorer, SnapshotScore, Task,
    TaskResult,
};
