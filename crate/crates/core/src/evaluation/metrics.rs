use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphdata::{canonical, Edge};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub u: usize,
    pub v: usize,
    pub score: f64,
    pub label: bool,
}

/// Candidate node pairs with model scores and ground-truth labels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoredPairs {
    pairs: Vec<ScoredPair>,
}

impl ScoredPairs {
    /// Rejects duplicate unordered pairs and non-finite scores.
    pub fn new(pairs: Vec<ScoredPair>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for p in &pairs {
            if !p.score.is_finite() {
                return Err(Error::Domain {
                    op: "scored pair",
                    value: p.score,
                });
            }
            if !seen.insert(canonical(p.u, p.v)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate candidate pair ({}, {})",
                    p.u, p.v
                )));
            }
        }
        Ok(Self { pairs })
    }

    /// Scores `positives` and then `negatives` with `score`.
    pub fn from_edges(
        positives: &[Edge],
        negatives: &[Edge],
        mut score: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pairs = Vec::with_capacity(positives.len() + negatives.len());
        for (edges, label) in [(positives, true), (negatives, false)] {
            for &(u, v) in edges {
                pairs.push(ScoredPair {
                    u,
                    v,
                    score: score(u, v),
                    label,
                });
            }
        }
        Self::new(pairs)
    }

    pub fn pairs(&self) -> &[ScoredPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn num_positive(&self) -> usize {
        self.pairs.iter().filter(|p| p.label).count()
    }
}

/// Area under the ROC curve in Mann–Whitney form: the probability that a
/// random positive outscores a random negative, ties counting one half.
pub fn auc(sp: &ScoredPairs) -> Result<f64> {
    let n_pos = sp.num_positive();
    let n_neg = sp.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<&ScoredPair> = sp.pairs.iter().collect();
    order.sort_by(|a, b| a.score.total_cmp(&b.score));

    // Twice the rank sum, so tied groups stay in integers.
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && order[j].score == order[i].score {
            j += 1;
        }
        // Ranks i+1..=j share the average (i + 1 + j) / 2.
        let pos_in_group = order[i..j].iter().filter(|p| p.label).count() as u128;
        rank_sum2 += pos_in_group * (i as u128 + 1 + j as u128);
        i = j;
    }
    let (p, n) = (n_pos as u128, n_neg as u128);
    let u2 = rank_sum2 - p * (p + 1);
    Ok(u2 as f64 / (2 * p * n) as f64)
}

/// Mean precision at each positive hit of the score-descending ranking.
/// Equal scores keep their input order.
pub fn average_precision(sp: &ScoredPairs) -> Result<f64> {
    let n_pos = sp.num_positive();
    if n_pos == 0 {
        return Err(Error::NoPositives);
    }
    let mut order: Vec<&ScoredPair> = sp.pairs.iter().collect();
    order.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut hits = 0usize;
    let mut total = 0.0;
    for (k, p) in order.iter().enumerate() {
        if p.label {
            hits += 1;
            total += hits as f64 / (k + 1) as f64;
        }
    }
    Ok(total / n_pos as f64)
}
