//! Stochastic-block-model sequence with one node migrating between
//! communities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DynamicGraph, Edge, SnapshotGraph};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MigrationConfig {
    pub communities: usize,
    pub nodes_per_community: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Node that moves from community 0 to community 1. Defaults to the last
    /// node of community 0.
    pub migrating_node: Option<usize>,
    pub steps: usize,
    /// Probability that a background node pair is redrawn from the block
    /// model at each step after the first. Zero keeps the first draw.
    pub churn: f64,
    pub seed: u64,
}

impl Default for MigrationConfig {
    fn default() -> Self {
        Self {
            communities: 3,
            nodes_per_community: 20,
            p_in: 0.3,
            p_out: 0.01,
            migrating_node: None,
            steps: 6,
            churn: 0.0,
            seed: 0,
        }
    }
}

/// Where the migrating node is attached at a given step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Source,
    Split,
    Target,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MigrationGraph {
    pub graph: DynamicGraph,
    /// Static community of every node (the migrating node is listed under its
    /// source community).
    pub community: Vec<usize>,
    pub migrating_node: usize,
    /// A node of a community that never changes, for comparison.
    pub control_node: usize,
    pub source: usize,
    pub target: usize,
    pub phases: Vec<Phase>,
}

impl MigrationGraph {
    /// The two snapshots during which the node moves.
    pub fn transfer_steps(&self) -> [usize; 2] {
        let first = self.phases.iter().position(|&p| p == Phase::Split).expect("split phase");
        [first, first + 1]
    }
}

/// Snapshot `t` puts the migrating node fully in the source community before
/// the transfer, half in each community at the first transfer step, and fully
/// in the target community afterwards. All other node pairs follow the block
/// model: drawn at the first step, then each redrawn with probability
/// `churn` per step.
pub fn generate_migration_graph(cfg: &MigrationConfig) -> Result<MigrationGraph> {
    let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
    if !prob_ok(cfg.p_in) || !prob_ok(cfg.p_out) || cfg.p_in <= cfg.p_out {
        return Err(Error::InvalidConfig(format!(
            "need 0 <= p_out < p_in <= 1, got p_in={} p_out={}",
            cfg.p_in, cfg.p_out
        )));
    }
    if !prob_ok(cfg.churn) {
        return Err(Error::InvalidConfig(format!("churn {} outside [0, 1]", cfg.churn)));
    }
    if cfg.steps < 3 {
        return Err(Error::InvalidConfig("need at least 3 steps".into()));
    }
    if cfg.communities < 2 || cfg.nodes_per_community < 2 {
        return Err(Error::InvalidConfig(
            "need at least 2 communities of at least 2 nodes".into(),
        ));
    }
    let k = cfg.nodes_per_community;
    let n = cfg.communities * k;
    let migrating = cfg.migrating_node.unwrap_or(k - 1);
    if migrating >= k {
        return Err(Error::InvalidConfig(format!(
            "migrating node {migrating} is not in community 0 (nodes 0..{k})"
        )));
    }
    let (source, target) = (0, 1);
    let control_community = if cfg.communities > 2 { 2 } else { 1 };
    let control_node = control_community * k;
    let community: Vec<usize> = (0..n).map(|i| i / k).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // Fixed neighbourhoods of the migrating node in its two communities.
    let source_nbrs: Vec<usize> = (0..k)
        .filter(|&v| v != migrating)
        .filter(|_| rng.random::<f64>() < cfg.p_in)
        .collect();
    let target_nbrs: Vec<usize> = (k..2 * k).filter(|_| rng.random::<f64>() < cfg.p_in).collect();

    let split_at = (cfg.steps - 1) / 2;
    let phases: Vec<Phase> = (0..cfg.steps)
        .map(|t| match t.cmp(&split_at) {
            std::cmp::Ordering::Less => Phase::Source,
            std::cmp::Ordering::Equal => Phase::Split,
            std::cmp::Ordering::Greater => Phase::Target,
        })
        .collect();

    // Background pairs: everything except the migrating node's edges into
    // communities 0 and 1, which the phases control.
    let mut pairs: Vec<(Edge, f64)> = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if community[u] == community[v] {
                cfg.p_in
            } else {
                cfg.p_out
            };
            if u == migrating || v == migrating {
                let other = if u == migrating { v } else { u };
                if other < 2 * k {
                    continue;
                }
            }
            pairs.push(((u, v), p));
        }
    }
    let half = |s: &[usize]| s.len().div_ceil(2);
    let mut present: Vec<bool> = pairs.iter().map(|&(_, p)| rng.random::<f64>() < p).collect();
    let mut snapshots = Vec::with_capacity(cfg.steps);
    for (t, &phase) in phases.iter().enumerate() {
        if t > 0 && cfg.churn > 0.0 {
            for (on, &(_, p)) in present.iter_mut().zip(&pairs) {
                if rng.random::<f64>() < cfg.churn {
                    *on = rng.random::<f64>() < p;
                }
            }
        }
        let attached: Vec<usize> = match phase {
            Phase::Source => source_nbrs.clone(),
            Phase::Split => source_nbrs[..half(&source_nbrs)]
                .iter()
                .chain(&target_nbrs[..half(&target_nbrs)])
                .copied()
                .collect(),
            Phase::Target => target_nbrs.clone(),
        };
        let edges = pairs
            .iter()
            .zip(&present)
            .filter(|(_, &on)| on)
            .map(|(&(e, _), _)| e)
            .chain(attached.iter().map(|&v| (migrating, v)));
        snapshots.push(SnapshotGraph::with_prefix_nodes(n, edges)?);
    }

    Ok(MigrationGraph {
        graph: DynamicGraph::new(snapshots)?,
        community,
        migrating_node: migrating,
        control_node,
        source,
        target,
        phases,
    })
}
