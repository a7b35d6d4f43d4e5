//! Dense tensors with reverse-mode automatic differentiation.
//!
//! Complex quantities are carried as pairs of real tensors, so every
//! derivative is an ordinary real derivative of a real objective. Reductions
//! run in fixed row-major order, which makes single-threaded evaluation
//! bit-reproducible.

mod complex;
mod gradcheck;
mod graph;
mod tensor;

pub use complex::{abs2, cadd, cmatmul, cmul, unit_phasor, ComplexTensor, ComplexVar};
pub use gradcheck::{grad_check, grad_check_coords, GradCheckReport};
pub use graph::{Gradients, Graph, ReduceMode, Var};
pub use tensor::Tensor;

