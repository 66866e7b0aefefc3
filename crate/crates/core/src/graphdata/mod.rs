//! Dynamic-graph data model, file format, GCN normalisation, evaluation
//! splits, statistics and the synthetic migration generator.

mod generator;
mod io;
mod normalize;
mod snapshot;
mod split;
mod stats;

pub use generator::{generate_migration_graph, MigrationConfig, MigrationGraph, Phase};
pub use io::{format_edge_list, load_dynamic_graph, parse_edge_list, save_dynamic_graph};
pub use normalize::{gcn_normalize, identity_attributes};
pub(crate) use snapshot::canonical;
pub use snapshot::{DynamicGraph, Edge, SnapshotGraph};
pub(crate) use split::sample_nonedges;
pub use split::{
    make_detection_split, make_temporal_split, new_edges, SnapshotSplit, SplitSpec,
    MIN_SPLIT_EDGES, TEST_FRACTION, VAL_FRACTION,
};
pub use stats::{average_clustering, compute_stats, density, GraphStats};
