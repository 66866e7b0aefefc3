#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vgrnn::graphdata::{DynamicGraph, Edge, SnapshotGraph};
use vgrnn::Tensor;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rows: usize, cols: usize, scale: f64, rng: &mut impl Rng) -> Tensor {
    let data = (0..rows * cols).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect();
    Tensor::from_vec(rows, cols, data).unwrap()
}

pub fn random_edges(ids: &[usize], p: f64, rng: &mut impl Rng) -> Vec<Edge> {
    let mut out = Vec::new();
    for (i, &u) in ids.iter().enumerate() {
        for &v in &ids[i + 1..] {
            if rng.random::<f64>() < p {
                out.push((u, v));
            }
        }
    }
    out
}

pub fn random_snapshot(n: usize, p: f64, rng: &mut impl Rng) -> SnapshotGraph {
    let ids: Vec<usize> = (0..n).collect();
    SnapshotGraph::new(ids.clone(), random_edges(&ids, p, rng), None).unwrap()
}

/// `steps` snapshots over ids `0..n`, where snapshot 0 omits the last node
/// so that it first appears later.
pub fn small_dynamic_graph(n: usize, steps: usize, p: f64, seed: u64) -> DynamicGraph {
    let mut r = rng(seed);
    let snaps = (0..steps)
        .map(|t| {
            let ids: Vec<usize> = if t == 0 { (0..n - 1).collect() } else { (0..n).collect() };
            let edges = random_edges(&ids, p, &mut r);
            SnapshotGraph::new(ids, edges, None).unwrap()
        })
        .collect();
    DynamicGraph::new(snaps).unwrap()
}
