use serde::{Deserialize, Serialize};

use super::{DynamicGraph, SnapshotGraph};

/// Density and average clustering coefficient per snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub density: Vec<f64>,
    pub clustering: Vec<f64>,
}

/// `2|E| / (N(N-1))`; zero for graphs with fewer than two nodes.
pub fn density(g: &SnapshotGraph) -> f64 {
    let n = g.num_nodes() as f64;
    if g.num_nodes() < 2 {
        return 0.0;
    }
    2.0 * g.num_edges() as f64 / (n * (n - 1.0))
}

/// Mean over all nodes of the local clustering coefficient; nodes with degree
/// below two contribute zero.
pub fn average_clustering(g: &SnapshotGraph) -> f64 {
    let n = g.num_nodes();
    if n == 0 {
        return 0.0;
    }
    let adj = g.neighbors();
    let mut marks = vec![false; n];
    let mut total = 0.0;
    for nb in &adj {
        let d = nb.len();
        if d < 2 {
            continue;
        }
        for &v in nb {
            marks[v] = true;
        }
        let mut links = 0usize;
        for &v in nb {
            links += adj[v].iter().filter(|&&w| marks[w]).count();
        }
        for &v in nb {
            marks[v] = false;
        }
        // every neighbour-neighbour link is counted from both ends
        total += (links / 2) as f64 / (d * (d - 1) / 2) as f64;
    }
    total / n as f64
}

pub fn compute_stats(dg: &DynamicGraph) -> GraphStats {
    GraphStats {
        density: dg.snapshots().iter().map(density).collect(),
        clustering: dg.snapshots().iter().map(average_clustering).collect(),
    }
}
