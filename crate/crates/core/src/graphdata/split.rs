use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{canonical, DynamicGraph, Edge, SnapshotGraph};
use crate::error::{Error, Result};

pub const VAL_FRACTION: f64 = 0.05;
pub const TEST_FRACTION: f64 = 0.10;
/// Smallest edge count for which a 5% validation share is at least one edge.
pub const MIN_SPLIT_EDGES: usize = 20;

/// Held-out edges and sampled non-edges of one snapshot, by global node id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotSplit {
    pub train_edges: Vec<Edge>,
    pub val_edges: Vec<Edge>,
    pub test_edges: Vec<Edge>,
    pub val_nonedges: Vec<Edge>,
    pub test_nonedges: Vec<Edge>,
}

/// Per-snapshot link-detection split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub snapshots: Vec<SnapshotSplit>,
    /// Trailing snapshot indices reserved for temporal testing.
    pub holdout_snapshots: Vec<usize>,
}

impl SplitSpec {
    /// The graph seen during training: every snapshot with its validation and
    /// test edges removed.
    pub fn training_graph(&self, dg: &DynamicGraph) -> Result<DynamicGraph> {
        if self.snapshots.len() != dg.len() {
            return Err(Error::InvalidConfig(format!(
                "split covers {} snapshots, graph has {}",
                self.snapshots.len(),
                dg.len()
            )));
        }
        let snaps = dg
            .snapshots()
            .iter()
            .zip(&self.snapshots)
            .map(|(s, sp)| s.with_edges(sp.train_edges.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DynamicGraph::from_snapshots(snaps)?.with_num_nodes(dg.num_nodes()))
    }

    pub fn with_holdout(mut self, count: usize) -> Self {
        let t = self.snapshots.len();
        self.holdout_snapshots = (t.saturating_sub(count)..t).collect();
        self
    }
}

fn share(edges: usize, fraction: f64) -> usize {
    ((edges as f64 * fraction).floor() as usize).max(1)
}

/// Samples `count` distinct unordered node pairs that are neither edges of
/// `g` nor members of `exclude`.
pub(crate) fn sample_nonedges(
    g: &SnapshotGraph,
    count: usize,
    exclude: &BTreeSet<Edge>,
    rng: &mut impl Rng,
) -> Result<Vec<Edge>> {
    let n = g.num_nodes();
    let pairs = n * n.saturating_sub(1) / 2;
    let available = pairs - g.num_edges() - exclude.iter().filter(|e| !g.has_edge(e.0, e.1)).count();
    if available < count {
        return Err(Error::InvalidGraph(format!(
            "only {available} non-edges available, {count} requested"
        )));
    }
    let ids = g.node_ids();
    let mut chosen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    if available >= 4 * count {
        while out.len() < count {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b {
                continue;
            }
            let e = canonical(ids[a], ids[b]);
            if g.has_edge(e.0, e.1) || exclude.contains(&e) || !chosen.insert(e) {
                continue;
            }
            out.push(e);
        }
    } else {
        let mut all: Vec<Edge> = Vec::with_capacity(available);
        for a in 0..n {
            for b in a + 1..n {
                let e = canonical(ids[a], ids[b]);
                if !g.has_edge(e.0, e.1) && !exclude.contains(&e) {
                    all.push(e);
                }
            }
        }
        all.shuffle(rng);
        all.truncate(count);
        out = all;
    }
    Ok(out)
}

/// Per snapshot: 5% of edges to validation, 10% to test (floor, minimum one),
/// the rest for training, plus equally many sampled non-edges for each
/// held-out set. Deterministic in `seed`.
pub fn make_detection_split(dg: &DynamicGraph, seed: u64) -> Result<SplitSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut snapshots = Vec::with_capacity(dg.len());
    for (t, g) in dg.snapshots().iter().enumerate() {
        let m = g.num_edges();
        if m < MIN_SPLIT_EDGES {
            return Err(Error::TooFewEdges {
                snapshot: t,
                edges: m,
                required: MIN_SPLIT_EDGES,
            });
        }
        let (n_val, n_test) = (share(m, VAL_FRACTION), share(m, TEST_FRACTION));
        let mut edges: Vec<Edge> = g.edges().collect();
        edges.shuffle(&mut rng);
        let test_edges = edges[..n_test].to_vec();
        let val_edges = edges[n_test..n_test + n_val].to_vec();
        let mut train_edges = edges[n_test + n_val..].to_vec();
        train_edges.sort_unstable();

        let val_nonedges = sample_nonedges(g, n_val, &BTreeSet::new(), &mut rng)?;
        let taken: BTreeSet<Edge> = val_nonedges.iter().copied().collect();
        let test_nonedges = sample_nonedges(g, n_test, &taken, &mut rng)?;
        snapshots.push(SnapshotSplit {
            train_edges,
            val_edges,
            test_edges,
            val_nonedges,
            test_nonedges,
        });
    }
    Ok(SplitSpec {
        snapshots,
        holdout_snapshots: Vec::new(),
    })
}

/// First `T - holdout` snapshots for training, the last `holdout` for the
/// prediction tasks.
pub fn make_temporal_split(
    dg: &DynamicGraph,
    holdout: usize,
) -> Result<(DynamicGraph, Vec<SnapshotGraph>)> {
    if holdout >= dg.len() {
        return Err(Error::InvalidConfig(format!(
            "holdout {holdout} must be smaller than the number of snapshots {}",
            dg.len()
        )));
    }
    let cut = dg.len() - holdout;
    let train = DynamicGraph::from_snapshots(dg.snapshots()[..cut].to_vec())?
        .with_num_nodes(dg.num_nodes());
    Ok((train, dg.snapshots()[cut..].to_vec()))
}

/// Edges of `next` that are absent from `prev`, by global id.
pub fn new_edges(prev: &SnapshotGraph, next: &SnapshotGraph) -> Vec<Edge> {
    next.edges().filter(|e| !prev.has_edge(e.0, e.1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> SnapshotGraph {
        let mut edges: Vec<Edge> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        edges.extend((0..n).map(|i| (i, (i + 2) % n)));
        SnapshotGraph::with_prefix_nodes(n, edges).unwrap()
    }

    #[test]
    fn hundred_edges_split_5_10_85() {
        let g = ring(50);
        assert_eq!(g.num_edges(), 100);
        let dg = DynamicGraph::new(vec![g.clone(), g]).unwrap();
        let sp = make_detection_split(&dg, 3).unwrap();
        for s in &sp.snapshots {
            assert_eq!((s.val_edges.len(), s.test_edges.len(), s.train_edges.len()), (5, 10, 85));
            assert_eq!(s.val_nonedges.len(), 5);
            assert_eq!(s.test_nonedges.len(), 10);
        }
    }

    #[test]
    fn too_few_edges_names_snapshot() {
        let dg = DynamicGraph::new(vec![ring(20), ring(5)]).unwrap();
        match make_detection_split(&dg, 0) {
            Err(Error::TooFewEdges { snapshot: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn temporal_split_counts() {
        let g = SnapshotGraph::with_prefix_nodes(2, [(0, 1)]).unwrap();
        let dg = DynamicGraph::new(vec![g; 11]).unwrap();
        let (train, test) = make_temporal_split(&dg, 3).unwrap();
        assert_eq!((train.len(), test.len()), (8, 3));
        let (train, test) = make_temporal_split(&dg, 0).unwrap();
        assert_eq!((train.len(), test.len()), (11, 0));
        assert!(make_temporal_split(&dg, 11).is_err());
        let dg40 = DynamicGraph::new(vec![dg.snapshot(0).clone(); 40]).unwrap();
        assert_eq!(make_temporal_split(&dg40, 10).unwrap().0.len(), 30);
    }

    #[test]
    fn new_edges_definition() {
        let prev = SnapshotGraph::with_prefix_nodes(3, []).unwrap();
        let next = SnapshotGraph::with_prefix_nodes(3, [(1, 0)]).unwrap();
        assert_eq!(new_edges(&prev, &next), vec![(0, 1)]);
        assert!(new_edges(&next, &next).is_empty());
    }

    #[test]
    fn dense_graph_falls_back_to_enumeration() {
        // 8 nodes, 28 pairs; a near-complete graph leaves few non-edges.
        let mut edges = Vec::new();
        for u in 0..8 {
            for v in u + 1..8 {
                if (u + v) % 7 != 0 {
                    edges.push((u, v));
                }
            }
        }
        let g = SnapshotGraph::with_prefix_nodes(8, edges).unwrap();
        let free = 28 - g.num_edges();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let got = sample_nonedges(&g, free, &BTreeSet::new(), &mut rng).unwrap();
        assert_eq!(got.len(), free);
        assert!(got.iter().all(|e| !g.has_edge(e.0, e.1)));
        assert!(sample_nonedges(&g, free + 1, &BTreeSet::new(), &mut rng).is_err());
    }
}
