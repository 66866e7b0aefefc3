//! Graph convolution, graph-GRU cell, per-node MLPs and the inner-product
//! decoder. Layers hold [`ParamId`]s into a shared [`ParamStore`]; a forward
//! pass reads them through a [`Bound`] for the current tape.
//!
//! [`ParamId`]: crate::autodiff::ParamId
//! [`ParamStore`]: crate::autodiff::ParamStore
//! [`Bound`]: crate::autodiff::Bound

mod decoder;
mod gcn;
mod gru;
mod mlp;

use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};

pub use decoder::{decode, decode_logits, decode_tensor};
pub use gcn::GcnLayer;
pub use gru::GraphGruCell;
pub use mlp::{Linear, Mlp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    None,
    Relu,
    Softplus,
}

impl Activation {
    pub fn apply(self, tape: &mut Tape, x: Var) -> Var {
        match self {
            Activation::None => x,
            Activation::Relu => tape.relu(x),
            Activation::Softplus => tape.softplus(x),
        }
    }
}
