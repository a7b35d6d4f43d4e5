use std::f64::consts::TAU;

use super::types::PhaseConfig;
use crate::{Error, Result};

/// Rounds every phase (mod 2π) to the nearest of `levels` equally spaced
/// values `k·2π/levels`; exact midpoints round down.
pub fn quantize_phases(phase: &PhaseConfig, levels: u32) -> Result<PhaseConfig> {
    if levels < 2 {
        return Err(Error::contract(format!("need at least 2 phase levels, got {levels}")));
    }
    let step = TAU / levels as f64;
    let psi = phase
        .psi
        .iter()
        .map(|p| {
            let k = (p.rem_euclid(TAU) / step - 0.5).ceil() as i64;
            k.rem_euclid(levels as i64) as f64 * step
        })
        .collect();
    Ok(PhaseConfig { psi })
}
