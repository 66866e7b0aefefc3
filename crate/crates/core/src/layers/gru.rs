use std::sync::Arc;

use rand::Rng;

use super::{Activation, GcnLayer};
use crate::autodiff::{Bound, ParamStore, SparseMatrix, Tape, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GatePair {
    pub input: GcnLayer,
    pub hidden: GcnLayer,
}

impl GatePair {
    fn new(
        store: &mut ParamStore,
        name: &str,
        input_dim: usize,
        hidden_dim: usize,
        rng: &mut impl Rng,
    ) -> Self {
        Self {
            input: GcnLayer::new(store, &format!("{name}.x"), input_dim, hidden_dim, Activation::None, rng),
            hidden: GcnLayer::new(store, &format!("{name}.h"), hidden_dim, hidden_dim, Activation::None, rng),
        }
    }
}

/// GRU cell whose input-to-hidden and hidden-to-hidden maps are one-hop
/// graph convolutions over the current snapshot.
#[derive(Clone, Debug)]
pub struct GraphGruCell {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub update: GatePair,
    pub reset: GatePair,
    pub candidate: GatePair,
}

impl GraphGruCell {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        input_dim: usize,
        hidden_dim: usize,
        rng: &mut impl Rng,
    ) -> Self {
        Self {
            input_dim,
            hidden_dim,
            update: GatePair::new(store, &format!("{name}.z"), input_dim, hidden_dim, rng),
            reset: GatePair::new(store, &format!("{name}.r"), input_dim, hidden_dim, rng),
            candidate: GatePair::new(store, &format!("{name}.c"), input_dim, hidden_dim, rng),
        }
    }

    /// One recurrence step:
    ///
    /// ```text
    /// z  = σ(GCN_zx(x) + GCN_zh(h))
    /// r  = σ(GCN_rx(x) + GCN_rh(h))
    /// h̃  = tanh(GCN_cx(x) + GCN_ch(r ⊙ h))
    /// h' = (1 − z) ⊙ h + z ⊙ h̃
    /// ```
    pub fn step(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        a_norm: &Arc<SparseMatrix>,
        x_in: Var,
        h_prev: Var,
    ) -> Result<Var> {
        let (n, dx) = tape.shape(x_in);
        let sh = tape.shape(h_prev);
        if dx != self.input_dim || sh != (n, self.hidden_dim) || a_norm.rows() != n {
            return Err(Error::ShapeMismatch {
                op: "gru_step",
                lhs: (n, dx),
                rhs: sh,
            });
        }
        let gate = |tape: &mut Tape, pair: &GatePair, h: Var| -> Result<Var> {
            let a = pair.input.forward(tape, bound, a_norm, x_in)?;
            let b = pair.hidden.forward(tape, bound, a_norm, h)?;
            tape.add(a, b)
        };
        let z_pre = gate(tape, &self.update, h_prev)?;
        let z = tape.sigmoid(z_pre);
        let r_pre = gate(tape, &self.reset, h_prev)?;
        let r = tape.sigmoid(r_pre);
        let rh = tape.mul(r, h_prev)?;
        let c_pre = gate(tape, &self.candidate, rh)?;
        let cand = tape.tanh(c_pre);

        let neg_z = tape.scale(z, -1.0);
        let keep = tape.add_scalar(neg_z, 1.0);
        let kept = tape.mul(keep, h_prev)?;
        let fresh = tape.mul(z, cand)?;
        tape.add(kept, fresh)
    }
}
