//! Command implementations behind the `vgrnn` binary.

pub mod commands;
pub mod config;
pub mod plot;

pub use commands::{
    aggregate_results, cmd_embed, cmd_evaluate, cmd_generate, cmd_stats, cmd_train,
    read_csv, read_embeddings, EmbeddingRow, Manifest, MetricSummary, ResultRow, ResultSummary,
    RunSummary, StatsRow,
};
pub use config::{Command, RunConfig};
