use std::sync::Arc;

use super::recon::ReconTarget;
use crate::autodiff::{SparseMatrix, Tensor};
use crate::error::{Error, Result};
use crate::graphdata::{gcn_normalize, identity_attributes, DynamicGraph, SnapshotGraph};

/// Everything a model step needs from one snapshot, computed once.
#[derive(Clone, Debug)]
pub struct PreparedSnapshot {
    pub node_ids: Vec<usize>,
    pub a_norm: Arc<SparseMatrix>,
    pub features: Tensor,
    pub recon: ReconTarget,
}

impl PreparedSnapshot {
    /// `input_dim` is the model's attribute width. Graphs without attributes
    /// get one-hot identity features, which requires every id `< input_dim`.
    pub fn new(g: &SnapshotGraph, input_dim: usize) -> Result<Self> {
        let features = match g.attributes() {
            Some(x) => x.clone(),
            None => {
                if let Some(&id) = g.node_ids().iter().find(|&&id| id >= input_dim) {
                    return Err(Error::InvalidGraph(format!(
                        "node id {id} outside identity feature width {input_dim}"
                    )));
                }
                identity_attributes(g, input_dim)
            }
        };
        if features.cols() != input_dim {
            return Err(Error::ShapeMismatch {
                op: "prepare_snapshot",
                lhs: features.shape(),
                rhs: (g.num_nodes(), input_dim),
            });
        }
        Ok(Self {
            node_ids: g.node_ids().to_vec(),
            a_norm: Arc::new(gcn_normalize(g)),
            features,
            recon: ReconTarget::new(&g.adjacency()),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }
}

pub fn prepare_sequence(dg: &DynamicGraph, input_dim: usize) -> Result<Vec<PreparedSnapshot>> {
    dg.snapshots()
        .iter()
        .map(|g| PreparedSnapshot::new(g, input_dim))
        .collect()
}
