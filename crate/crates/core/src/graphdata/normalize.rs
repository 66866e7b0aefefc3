use super::SnapshotGraph;
use crate::autodiff::{SparseMatrix, Tensor};

/// One-hot attribute rows of width `global_n`, indexed by global node id, so
/// that every snapshot shares the same input width.
pub fn identity_attributes(g: &SnapshotGraph, global_n: usize) -> Tensor {
    let mut x = Tensor::zeros(g.num_nodes(), global_n);
    for (i, &id) in g.node_ids().iter().enumerate() {
        x.set(i, id, 1.0);
    }
    x
}

/// Renormalised adjacency `D̃^{-1/2} (A + I) D̃^{-1/2}`, with `D̃` the degree
/// matrix of `A + I`. Isolated nodes keep a unit self-loop.
pub fn gcn_normalize(g: &SnapshotGraph) -> SparseMatrix {
    let adj = g.neighbors();
    let dinv: Vec<f64> = adj
        .iter()
        .map(|nb| 1.0 / ((nb.len() + 1) as f64).sqrt())
        .collect();
    let mut entries = Vec::with_capacity(g.num_nodes() + 2 * g.num_edges());
    for (i, nb) in adj.iter().enumerate() {
        entries.push((i, i, dinv[i] * dinv[i]));
        for &j in nb {
            entries.push((i, j, dinv[i] * dinv[j]));
        }
    }
    SparseMatrix::new(g.num_nodes(), g.num_nodes(), entries).expect("valid normalized adjacency")
}
