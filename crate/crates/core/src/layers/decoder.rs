use crate::autodiff::{sigmoid, Tape, Tensor, Var};
use crate::error::Result;

/// Inner-product logits `Z · Zᵀ`. Exactly symmetric.
pub fn decode_logits(tape: &mut Tape, z: Var) -> Result<Var> {
    tape.matmul_nt(z, z)
}

/// Edge probabilities `sigmoid(Z · Zᵀ)`.
pub fn decode(tape: &mut Tape, z: Var) -> Result<Var> {
    let logits = decode_logits(tape, z)?;
    Ok(tape.sigmoid(logits))
}

/// Tape-free [`decode`] for scoring.
pub fn decode_tensor(z: &Tensor) -> Tensor {
    z.matmul_nt(z).expect("square inner product").map(sigmoid)
}
