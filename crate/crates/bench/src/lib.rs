//! Shared fixtures for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vgrnn::graphdata::{generate_migration_graph, MigrationConfig, MigrationGraph, SnapshotGraph};
use vgrnn::Tensor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rows: usize, cols: usize, rng: &mut impl Rng) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.random::<f64>() - 0.5).collect();
    Tensor::from_vec(rows, cols, data).expect("shape")
}

/// Erdős–Rényi graph with `n` nodes and expected degree `degree`.
pub fn random_graph(n: usize, degree: f64, rng: &mut impl Rng) -> SnapshotGraph {
    let p = degree / (n - 1) as f64;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    SnapshotGraph::with_prefix_nodes(n, edges).expect("valid graph")
}

/// The default 3 × 20 migration benchmark.
pub fn migration_benchmark() -> MigrationGraph {
    generate_migration_graph(&MigrationConfig::default()).expect("default config")
}
