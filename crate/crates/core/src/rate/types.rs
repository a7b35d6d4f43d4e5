use std::f64::consts::TAU;

use crate::{CMatrix, C64};

/// RIS configuration: one phase per element, in radians.
///
/// Phases are unconstrained reals; the induced reflection `e^{jψ}` is
/// 2π-periodic, so wrapping is only applied for display.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    pub psi: Vec<f64>,
}

impl PhaseConfig {
    pub fn new(psi: Vec<f64>) -> Self {
        PhaseConfig { psi }
    }

    pub fn zeros(n: usize) -> Self {
        PhaseConfig { psi: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// Diagonal of `Φ`.
    pub fn phasors(&self) -> Vec<C64> {
        self.psi.iter().map(|&p| C64::from_polar(1.0, p)).collect()
    }

    /// Phases wrapped into `[0, 2π)`.
    pub fn wrapped(&self) -> Vec<f64> {
        self.psi.iter().map(|p| p.rem_euclid(TAU)).collect()
    }
}

/// Base-station precoding matrix `V` (antennas × users).
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub v: CMatrix,
}

impl Precoder {
    /// `trace(VVᴴ)`.
    pub fn power(&self) -> f64 {
        self.v.norm_squared()
    }
}
