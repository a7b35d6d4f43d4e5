//! Reference phase configurations: uniformly random phases and cyclic
//! coordinate descent over a per-element phase grid.

mod bcd;

pub use bcd::{bcd_optimize, BcdConfig, BcdOutcome};

use std::f64::consts::TAU;

use rand::Rng;

use crate::rate::PhaseConfig;

/// `n` phases drawn i.i.d. uniform on `[0, 2π)`.
pub fn random_phases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PhaseConfig {
    PhaseConfig::new((0..n).map(|_| rng.random_range(0.0..TAU)).collect())
}
