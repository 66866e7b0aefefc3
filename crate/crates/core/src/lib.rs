//! Variational graph recurrent networks for dynamic graphs.
//!
//! The crate provides a small reverse-mode autodiff engine ([`autodiff`]),
//! a dynamic-graph data model ([`graphdata`]), graph neural building blocks
//! ([`layers`]), the GRNN / VGRNN / SI-VGRNN model heads ([`models`]), the
//! optimisation loop ([`training`]) and link-prediction metrics and task
//! protocols ([`evaluation`]).

pub mod autodiff;
pub mod error;
pub mod evaluation;
pub mod graphdata;
pub mod layers;
pub mod models;
pub mod training;

pub use autodiff::{ParamStore, SparseMatrix, Tape, Tensor, Var};
pub use error::{Error, Result};
