//! Unsupervised learning of reconfigurable-intelligent-surface (RIS) phase
//! shifts for downlink multi-user MISO, trained jointly with a WMMSE precoder.
//!
//! The crate is organised bottom-up:
//!
//! * [`adgraph`]: a small dense-tensor engine with reverse-mode autodiff.
//! * [`channel`]: synthetic geometric channels and the per-(user, element)
//!   feature tensor fed to the network.
//! * [`rate`]: combined channel, sum-rate objective, WMMSE precoder and
//!   phase quantization.
//! * [`risnet`]: the permutation-invariant network with shared filters, in
//!   full-CSI and anchor-expanding partial-CSI flavours.
//! * [`baselines`]: random phases and cyclic coordinate descent.
//! * [`harness`]: training loop, evaluation, persistence and the config
//!   file format used by the `risnet` binary.

pub mod adgraph;
pub mod baselines;
pub mod channel;
mod error;
pub mod harness;
pub mod rate;
pub mod risnet;

pub use error::{Error, Result};

/// Complex scalar used for all non-differentiable linear algebra.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix used for channels and precoders.
pub type CMatrix = nalgebra::DMatrix<C64>;
