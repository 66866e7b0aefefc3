use std::sync::Arc;

use rand::Rng;

use super::Activation;
use crate::autodiff::{Bound, ParamId, ParamStore, SparseMatrix, Tape, Var};
use crate::error::Result;

/// `activation(Â · H · W)`.
#[derive(Clone, Debug)]
pub struct GcnLayer {
    pub weight: ParamId,
    pub activation: Activation,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl GcnLayer {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        Self {
            weight: store.add_glorot(format!("{name}.weight"), in_dim, out_dim, rng),
            activation,
            in_dim,
            out_dim,
        }
    }

    pub fn forward(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        a_norm: &Arc<SparseMatrix>,
        h: Var,
    ) -> Result<Var> {
        let hw = tape.matmul(h, bound.var(self.weight))?;
        let out = tape.spmm(a_norm, hw)?;
        Ok(self.activation.apply(tape, out))
    }
}
