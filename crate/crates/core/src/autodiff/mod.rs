//! Minimal reverse-mode automatic differentiation over dense `f64` matrices,
//! plus a sparse-times-dense product for normalized adjacency matrices.

pub mod gradcheck;
mod params;
mod sparse;
mod tape;
mod tensor;

pub use params::{Bound, ParamId, ParamStore};
pub use sparse::SparseMatrix;
pub use tape::{sigmoid, softplus, Axis, Binary, Gradients, Reduce, Tape, Unary, Var};
pub use tensor::Tensor;
