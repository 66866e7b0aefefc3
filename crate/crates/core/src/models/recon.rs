use crate::autodiff::{SparseMatrix, Tape, Tensor, Var};
use crate::error::Result;

/// Bernoulli reconstruction targets for one snapshot: `A + I` with the
/// positive class re-weighted against the sparse edge set.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconTarget {
    pub targets: Tensor,
    pub weights: Tensor,
    /// Weight of positive entries, `(N² − 2|E|) / (2|E|)`.
    pub pos_weight: f64,
    /// Overall scale, `N² / (2 (N² − 2|E|))`.
    pub norm: f64,
}

impl ReconTarget {
    /// From a binary symmetric adjacency without self-loops. An edgeless
    /// graph falls back to unweighted cross-entropy.
    pub fn new(adjacency: &SparseMatrix) -> Self {
        let n = adjacency.rows();
        let n2 = (n * n) as f64;
        let ones = adjacency.nnz() as f64;
        let (pos_weight, norm) = if adjacency.nnz() == 0 {
            (1.0, 1.0)
        } else {
            ((n2 - ones) / ones, n2 / (2.0 * (n2 - ones)))
        };
        let mut targets = adjacency.to_dense();
        for i in 0..n {
            targets.set(i, i, 1.0);
        }
        let weights = targets.map(|y| if y > 0.0 { pos_weight } else { 1.0 });
        Self {
            targets,
            weights,
            pos_weight,
            norm,
        }
    }
}

/// Negative weighted log-likelihood of the snapshot under
/// `Bernoulli(sigmoid(logits))`, summed over all `N²` entries.
pub fn recon_loss(tape: &mut Tape, logits: Var, target: &ReconTarget) -> Result<Var> {
    let bce = tape.bce_with_logits(logits, target.targets.clone(), target.weights.clone())?;
    Ok(tape.scale(bce, target.norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighting_follows_edge_count() {
        let a = SparseMatrix::new(3, 3, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let t = ReconTarget::new(&a);
        assert_eq!(t.pos_weight, 7.0 / 2.0);
        assert_eq!(t.norm, 9.0 / 14.0);
        assert_eq!(t.targets.get(2, 2), 1.0);
        assert_eq!(t.weights.get(0, 2), 1.0);
        assert_eq!(t.weights.get(0, 1), 3.5);
    }

    #[test]
    fn edgeless_graph_is_unweighted() {
        let t = ReconTarget::new(&SparseMatrix::empty(4, 4));
        assert_eq!((t.pos_weight, t.norm), (1.0, 1.0));
    }

    #[test]
    fn saturated_logits_give_near_zero_loss() {
        let a = SparseMatrix::new(3, 3, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let t = ReconTarget::new(&a);
        let logits = t.targets.map(|y| if y > 0.0 { 30.0 } else { -30.0 });
        let mut tape = Tape::new();
        let l = tape.constant(logits);
        let loss = recon_loss(&mut tape, l, &t).unwrap();
        assert!(tape.item(loss) < 1e-11, "{}", tape.item(loss));
    }

    #[test]
    fn zero_logits_cost_ln2_per_weighted_entry() {
        let t = ReconTarget::new(&SparseMatrix::empty(2, 2));
        let mut tape = Tape::new();
        let l = tape.constant(Tensor::zeros(2, 2));
        let loss = recon_loss(&mut tape, l, &t).unwrap();
        assert!((tape.item(loss) - 4.0 * std::f64::consts::LN_2).abs() < 1e-15);
    }
}
