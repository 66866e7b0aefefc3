use rand::Rng;

use super::Activation;
use crate::autodiff::{Bound, ParamId, ParamStore, Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Fully connected layer applied to each row independently.
#[derive(Clone, Debug)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: ParamId,
    pub activation: Activation,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Linear {
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
            bias: store.add(format!("{name}.bias"), Tensor::zeros(1, out_dim)),
            activation,
            in_dim,
            out_dim,
        }
    }

    pub fn forward(&self, tape: &mut Tape, bound: &Bound, x: Var) -> Result<Var> {
        let xw = tape.matmul(x, bound.var(self.weight))?;
        let out = tape.add_row(xw, bound.var(self.bias))?;
        Ok(self.activation.apply(tape, out))
    }
}

/// Stack of [`Linear`] layers.
#[derive(Clone, Debug)]
pub struct Mlp {
    pub layers: Vec<Linear>,
}

impl Mlp {
    /// `dims = [in, h1, ..., out]`; every layer uses `activation`.
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        dims: &[usize],
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| Linear::new(store, &format!("{name}.{i}"), w[0], w[1], activation, rng))
            .collect();
        Self { layers }
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().expect("non-empty mlp").out_dim
    }

    pub fn forward(&self, tape: &mut Tape, bound: &Bound, x: Var) -> Result<Var> {
        let cols = tape.shape(x).1;
        if cols != self.in_dim() {
            return Err(Error::ShapeMismatch {
                op: "mlp_forward",
                lhs: tape.shape(x),
                rhs: (self.in_dim(), self.out_dim()),
            });
        }
        self.layers
            .iter()
            .try_fold(x, |h, layer| layer.forward(tape, bound, h))
    }
}
