use std::collections::{BTreeSet, HashMap};

use crate::autodiff::{SparseMatrix, Tensor};
use crate::error::{Error, Result};

/// Undirected edge between two global node ids, stored with `0 < 1`.
pub type Edge = (usize, usize);

pub(crate) fn canonical(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// One time step of a dynamic graph.
///
/// Nodes are identified globally; `node_ids[i]` is the global id of local row
/// `i` in the adjacency and attribute matrices. Edges are undirected, unweighted
/// and loop-free.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotGraph {
    node_ids: Vec<usize>,
    local: HashMap<usize, usize>,
    edges: BTreeSet<Edge>,
    attributes: Option<Tensor>,
}

impl SnapshotGraph {
    /// Builds a snapshot from global node ids and global-id edges. Edges are
    /// symmetrised and duplicates collapsed.
    pub fn new(
        node_ids: Vec<usize>,
        edges: impl IntoIterator<Item = Edge>,
        attributes: Option<Tensor>,
    ) -> Result<Self> {
        let mut local = HashMap::with_capacity(node_ids.len());
        for (i, &id) in node_ids.iter().enumerate() {
            if local.insert(id, i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node id {id}")));
            }
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
            }
            for w in [u, v] {
                if !local.contains_key(&w) {
                    return Err(Error::InvalidGraph(format!(
                        "edge ({u}, {v}) references undeclared node {w}"
                    )));
                }
            }
            set.insert(canonical(u, v));
        }
        if let Some(x) = &attributes {
            if x.rows() != node_ids.len() {
                return Err(Error::InvalidGraph(format!(
                    "attribute matrix has {} rows for {} nodes",
                    x.rows(),
                    node_ids.len()
                )));
            }
        }
        Ok(Self {
            node_ids,
            local,
            edges: set,
            attributes,
        })
    }

    /// Snapshot over nodes `0..n`.
    pub fn with_prefix_nodes(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        Self::new((0..n).collect(), edges, None)
    }

    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> &[usize] {
        &self.node_ids
    }

    pub fn local_index(&self, id: usize) -> Option<usize> {
        self.local.get(&id).copied()
    }

    pub fn contains_node(&self, id: usize) -> bool {
        self.local.contains_key(&id)
    }

    /// Edges by global id, canonical orientation, ascending.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&canonical(u, v))
    }

    pub fn attributes(&self) -> Option<&Tensor> {
        self.attributes.as_ref()
    }

    pub fn set_attributes(&mut self, x: Option<Tensor>) -> Result<()> {
        if let Some(t) = &x {
            if t.rows() != self.num_nodes() {
                return Err(Error::InvalidGraph(format!(
                    "attribute matrix has {} rows for {} nodes",
                    t.rows(),
                    self.num_nodes()
                )));
            }
        }
        self.attributes = x;
        Ok(())
    }

    /// Same nodes and attributes, different edge set.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        Self::new(self.node_ids.clone(), edges, self.attributes.clone())
    }

    /// Local-index adjacency lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for &(u, v) in &self.edges {
            let (a, b) = (self.local[&u], self.local[&v]);
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Symmetric binary adjacency over local indices.
    pub fn adjacency(&self) -> SparseMatrix {
        let mut entries = Vec::with_capacity(2 * self.edges.len());
        for &(u, v) in &self.edges {
            let (a, b) = (self.local[&u], self.local[&v]);
            entries.push((a, b, 1.0));
            entries.push((b, a, 1.0));
        }
        SparseMatrix::new(self.num_nodes(), self.num_nodes(), entries).expect("valid adjacency")
    }
}

/// Ordered sequence of snapshots over a shared global node-id space.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicGraph {
    snapshots: Vec<SnapshotGraph>,
    num_nodes: usize,
}

impl DynamicGraph {
    /// Requires at least two snapshots.
    pub fn new(snapshots: Vec<SnapshotGraph>) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(Error::InvalidGraph(format!(
                "a dynamic graph needs at least 2 snapshots, got {}",
                snapshots.len()
            )));
        }
        Self::from_snapshots(snapshots)
    }

    /// Like [`new`](Self::new) but accepts a single snapshot; used for the
    /// training prefix of a temporal split.
    pub fn from_snapshots(snapshots: Vec<SnapshotGraph>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::InvalidGraph("no snapshots".into()));
        }
        let attr_width = snapshots[0].attributes().map(Tensor::cols);
        for (t, s) in snapshots.iter().enumerate() {
            if s.attributes().map(Tensor::cols) != attr_width {
                return Err(Error::InvalidGraph(format!(
                    "snapshot {t} attribute width differs from snapshot 0"
                )));
            }
        }
        let num_nodes = snapshots
            .iter()
            .flat_map(|s| s.node_ids().iter().copied())
            .max()
            .map_or(0, |m| m + 1);
        Ok(Self {
            snapshots,
            num_nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Size of the global id space (largest id + 1).
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn snapshots(&self) -> &[SnapshotGraph] {
        &self.snapshots
    }

    pub fn snapshot(&self, t: usize) -> &SnapshotGraph {
        &self.snapshots[t]
    }

    /// Attribute width, if snapshots carry attributes.
    pub fn attribute_dim(&self) -> Option<usize> {
        self.snapshots[0].attributes().map(Tensor::cols)
    }

    /// Copy with the global id space widened to at least `n` nodes.
    pub fn with_num_nodes(mut self, n: usize) -> Self {
        self.num_nodes = self.num_nodes.max(n);
        self
    }
}
